// Evaluates a hand-written StarLang program on a small graph and prints the
// normalized rules next to the result.

#include <iostream>

#include "starquery/starquery.hpp"

using namespace starquery;

int main() {
    DatabaseBuilder b;
    std::vector<NodeId> n;
    for (const char* name : {"a", "b", "c", "d", "e"}) n.push_back(b.add_node(NodeKind::Other, {{"name", name}}));
    b.declare_binary("edge");
    b.add_edge("edge", n[0], n[1]);
    b.add_edge("edge", n[1], n[2]);
    b.add_edge("edge", n[3], n[4]);
    b.declare_unary("target");
    b.add_unary("target", n[2]);
    Database db = std::move(b).build();

    auto program = starlang::parse_starlang(R"(
        template Reaches(p) -> t { t(X) :- p(X). t(X) :- edge(X, Y), Reaches(p)(Y). }
        hit(X) :- Reaches(target)(X).
        miss(X) :- !hit(X).
        .query miss.
    )");

    auto prepared = prepare(program);
    std::cout << starlang::to_string(prepared.program) << "\n";
    for (std::size_t i = 0; i < prepared.strata.strata.size(); ++i) {
        std::cout << "stratum " << i << ":";
        for (auto& p : prepared.strata.strata[i]) std::cout << " " << p;
        std::cout << "\n";
    }

    auto result = evaluate(prepared, db);
    std::cout << "miss =";
    for (NodeId id : result.matches) std::cout << " " << *db.node(id).attr("name");
    std::cout << "\n";
}
