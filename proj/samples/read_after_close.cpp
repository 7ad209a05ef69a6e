// Builds a graph from a .toy file and runs a Codesearch query over it.
//
//   read_after_close [file.toy] [query]

#include <iostream>

#include "starquery/starquery.hpp"

using namespace starquery;

int main(int argc, char** argv) {
    std::string path = argc > 1 ? argv[1] : std::string(STARQUERY_SOURCE_DIR) + "/fixtures/toy/snippet2.toy";
    std::string query = argc > 2 ? argv[2]
                                 : R"(CallExpression<"read"> and HasArg0<DataFlowAfter<Arg0In<CallExpression<"close">>>>)";
    try {
        auto graph = toy::build_graph({toy::parse_toy_file(path)});
        auto program = codesearch::compile(codesearch::parse_codesearch(query));
        auto result = evaluate(program, graph.database);
        for (NodeId id : result.matches) {
            const auto& n = graph.database.node(id);
            std::cout << *n.attr("file") << ":" << *n.attr("line") << ":" << *n.attr("col") << "  " << *n.attr("name")
                      << "\n";
        }
        std::cout << result.matches.size() << " match(es), " << result.metrics.iterations << " iterations\n";
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}
