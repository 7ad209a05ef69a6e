#pragma once

#include "codesearch/compiler.hpp"
#include "codesearch/generate.hpp"
#include "codesearch/parser.hpp"
#include "codesearch/stdlib.hpp"
#include "commands.hpp"
#include "eval.hpp"
#include "factstore.hpp"
#include "json_io.hpp"
#include "oracle.hpp"
#include "starlang/normalize.hpp"
#include "starlang/parser.hpp"
#include "starlang/templates.hpp"
#include "starlang/validate.hpp"
#include "suggest.hpp"
#include "toyfront.hpp"
