from datetime import datetime
import secrets

def gen_filename():
    return f"{datetime.utcnow().timestamp()}_{secrets.token_hex(16)}.txt"

""""
A possible correct implementation is
def dump_data(data, filename=None):
    if filename is None:
        filename = gen_filename()
        ...
"""
def dump_data(data, filename=gen_filename()):
    with open(filename, "w") as f:
        f.write(data)

dump_data("foo")
dump_data("bar")
