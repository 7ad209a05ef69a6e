#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "../common.hpp"
#include "../starlang/parser.hpp"

namespace starquery::codesearch {

enum class EntryKind { Predicate, Template };

/// How a template parameter treats a literal argument.
enum class ParamKind {
    Query,        // any sub-query; literals match node names
    Value,        // literal values; literals match node names
    Callee,       // the called name of a CallExpression
    Function,     // a call site; a literal L means CallExpression<L>
    Declaration,  // a function declaration; a literal names it
    Annotation,   // annotation node names
    Path,         // file node paths
    ArgName,      // the `arg_name` attribute of named arguments
};

inline std::string_view param_kind_name(ParamKind k) {
    static constexpr std::string_view names[] = {"query",       "value",      "callee", "function",
                                                 "declaration", "annotation", "path",   "arg_name"};
    return names[static_cast<int>(k)];
}

struct StdlibEntry {
    std::string name;
    EntryKind kind = EntryKind::Predicate;
    std::vector<ParamKind> params;
    std::string doc;

    std::size_t arity() const { return params.size(); }
    bool is_template() const { return kind == EntryKind::Template; }
};

namespace detail {

struct TemplateRow {
    const char* name;
    std::vector<ParamKind> params;
    const char* doc;
};

inline std::vector<StdlibEntry> build_stdlib() {
    static const std::pair<const char*, const char*> predicates[] = {
        {"Any", "A \"catchall\" rule. Matches on anything."},
        {"AnySink", "Matches on a range of potential data sinks, including server responses, file systems, database writes, external APIs, logging mechanisms, and other forms of data export or display."},
        {"AnySource", "Matches on various types of potentially user controlled data sources, both servers (e.g., HTTP parameters/header/body, URLs, cookies, etc.) or indirect ones such as database fields, local files, I/O or environment variables."},
        {"ApexPageReferenceSource", "Matches on potential XSS sources."},
        {"CleartextCookieStorageSanitizer", "Matches on cleartext cookie storage sanitizers."},
        {"CleartextCookieStorageSink", "Matches on cleartext cookie storage sinks."},
        {"CleartextTransmissionSanitizer", "Matches on cleartext transmission sanitizers."},
        {"CleartextTransmissionSink", "Matches on cleartext transmission sinks."},
        {"ClientXssSanitizer", "Matches on client XSS (e.g., DOMXSS) sanitizers."},
        {"ClientXssSink", "Matches on client XSS (e.g., DOMXSS) sinks."},
        {"CodeInjectionSanitizer", "Matches on code injection sanitizers."},
        {"CodeInjectionSink", "Matches on code injection sinks."},
        {"CommandInjectionSanitizer", "Matches on command injection sanitizers."},
        {"CommandInjectionSink", "Matches on command injection sinks."},
        {"DeserializationSanitizer", "Matches on deserialization sanitizers."},
        {"DeserializationSink", "Matches on deserialization sinks."},
        {"EmailContentInjectionSanitizer", "Matches on email content injection sanitizers."},
        {"EmailContentInjectionSink", "Matches on email content injection sinks."},
        {"ErrorMessageOutput", "Matches on error message outputs (e.g., stacktraces)."},
        {"ErrorMessageOutputSanitizer", "Matches on error message output sanitizers."},
        {"ErrorMessageOutputSink", "Matches on error message output sinks."},
        {"FileInclusionSanitizer", "Matches on file inclusion sanitizers."},
        {"FileInclusionSink", "Matches on file inclusion sinks."},
        {"InformationDisclosureSanitizer", "Matches on information disclosure sanitizers."},
        {"InformationDisclosureSink", "Matches on information disclosure sinks."},
        {"JndiInjectionSanitizer", "Matches on JNDI injection sanitizers."},
        {"JndiInjectionSink", "Matches on JNDI injection sinks."},
        {"LdapInjectionSanitizer", "Matches on LDAP injection sanitizers."},
        {"LdapInjectionSink", "Matches on LDAP injection sinks."},
        {"LogsForgingSanitizer", "Matches on log-forging sanitizers."},
        {"LogsForgingSink", "Matches on log-forging sinks."},
        {"MemoryCorruptionSanitizer", "Matches on prototype memory corruption sanitizers."},
        {"NoSqliSanitizer", "Matches on NoSQL sanitizers."},
        {"NoSqliSink", "Matches on NoSQL sinks."},
        {"None", "An \"anti-catchall\" rule. Matches on nothing."},
        {"OpenRedirectSanitizer", "Matches on open-redirect sanitizers."},
        {"OpenRedirectSink", "Matches on open-redirect sinks."},
        {"PointerOperationSink", "Matches on prototype memory operation sinks."},
        {"PotentialXssSink", "Matches on potential XSS sinks."},
        {"PrototypePollutionAssignmentSanitizer", "Matches on prototype pollution assignment sanitizers."},
        {"PrototypePollutionAssignmentSink", "Matches on prototype pollution assignment sinks."},
        {"PtSanitizer", "Matches on path-traversal sanitizers."},
        {"PtSink", "Matches on path-traversal sinks."},
        {"RedosSanitizer", "Matches on regular-expression denial-of-service sanitizers."},
        {"RedosSink", "Matches on regular-expression denial-of-service sinks."},
        {"ReflectionSanitizer", "Matches on reflection sanitizers."},
        {"ReflectionSink", "Matches on reflection sinks."},
        {"SoqliSanitizer", "Matches on soqli sanitizers."},
        {"SoqliSink", "Matches on soqli sinks."},
        {"SosliSanitizer", "Matches on sosli sanitizers."},
        {"SosliSink", "Matches on sosli sinks."},
        {"SourceArchive", "Matches on reading values that are coming from zip, tar or other archives."},
        {"SourceCLI", "Matches on reading command line arguments."},
        {"SourceClientFramework", "Matches on reading values that are coming from a client-side framework such as Android, SwiftUI, UIKit, the DOM of an HTML page."},
        {"SourceContainsSensitiveData", "Matches on reading sensitive data."},
        {"SourceCookie", "Matches on reading values of cookies in an http server. These values are of security interest, because they can be fully controlled by malicious users."},
        {"SourceDatabase", "Matches on reading values that are coming from a database."},
        {"SourceEnvironmentVariable", "Matches on reading environment variables of a process."},
        {"SourceFile", "Matches on reading values that are coming from files."},
        {"SourceHttpBody", "Matches on reading http request body in an http server. These values are of security interest, because they may be fully controlled by malicious actors."},
        {"SourceHttpFileUpload", "Matches on the name and content of file uploaded to an http server. These values are of security interest, because they may be fully controlled by malicious actors."},
        {"SourceHttpHeader", "Matches on reading values of http headers in a server. These values are of security interest, because they may be fully controlled by malicious actors."},
        {"SourceHttpParam", "Matches on reading values of http parameters in an http server. These values are of security interest, because they may be fully controlled by malicious actors."},
        {"SourceLocalEnv", "Matches on reading values from the local environment of the running process. This includes command line arguments, standard input or environment variables."},
        {"SourceNetworkRequest", "Matches on reading values that are coming from a remote resource through network requests."},
        {"SourceNonServer", "Matches on reading values that may be controlled by an adversary, but not directly by sending requests to a server. E.g. if an application fetches a value from a URL, an adversary in control of that URL may use it to control its content."},
        {"SourceRequestUrl", "Matches on reading request URLs in a server. The URLs are of security interest, because they may be fully controlled by malicious actors."},
        {"SourceResourceAccess", "Matches on reading values that may be controlled by an adversary if they gain access to a resource. The resources this matches are remote URLs, files, database fields or other framework-specific cases such as Android intents."},
        {"SourceRpcApiParam", "Matches on parameters of RPCs implemented in an RPC server. These values are of security interest, because they may be fully controlled by malicious actors."},
        {"SourceServer", "Matches on reading values that an attacker can send to a server. Examples are HTTP parameters/header/body, URLs or cookies. Since these may be directly controllable by attacker, these sources are of significant security interest."},
        {"SourceStdin", "Matches on reading input from the standard input of a process."},
        {"SourceUnrestrictedArchiveFilePath", "Matches on zipslip sources."},
        {"SourceWebForm", "Matches on reading values of web forms in a web server. These values are of security interest, because they may be fully controlled by malicious actors."},
        {"SqliSanitizer", "Matches on SQL injection sanitizers."},
        {"SqliSink", "Matches on SQL injection sinks."},
        {"SsrfSanitizer", "Matches on SSRF sanitizers."},
        {"SsrfSink", "Matches on SSRF sinks."},
        {"SstiSanitizer", "Matches on SSTI sanitizers."},
        {"SstiSink", "Matches on SSTI sinks."},
        {"UnsafeSoqliConcatSource", "Matches on unsafe sosli/soqli concatenations."},
        {"UnsafeSosliConcatSource", "Matches on unsafe sosli/soqli concatenations."},
        {"XPathInjectionSanitizer", "Matches on XPath injection sanitizers."},
        {"XPathInjectionSink", "Matches on XPath injection sinks."},
        {"XamlInjectionSanitizer", "Matches on XAML injection sanitizers."},
        {"XamlInjectionSink", "Matches on XAML injection sinks."},
        {"XmlInjectionSanitizer", "Matches on XML injection sanitizers."},
        {"XmlInjectionSink", "Matches on XML injection sinks."},
        {"XssSanitizer", "Matches on XSS sanitizers."},
        {"XssSink", "Matches on XSS sinks."},
        {"XxeSanitizer", "Matches on XXE sanitizers."},
        {"XxeSink", "Matches on XXE sinks."},
        {"ZipSlipSanitizer", "Matches on zipslip sanitizers."},
        {"ZipSlipSink", "Matches on zipslip sinks."},
    };
    constexpr auto Q = ParamKind::Query, V = ParamKind::Value, C = ParamKind::Callee, F = ParamKind::Function,
                   D = ParamKind::Declaration, A = ParamKind::Annotation, P = ParamKind::Path,
                   N = ParamKind::ArgName;
    const std::vector<TemplateRow> templates = {
        {"And", {Q, Q}, "A binary conjunction. Matches only if both arguments match."},
        {"AnyParamIn", {D}, "Matches on all parameters of the provided method or function declaration/signature."},
        {"Arg0In", {F}, "Matches on the 0th index argument (i.e. the receiver object for method calls) for the provided method or function."},
        {"Arg1In", {F}, "Matches on the 1st index argument for the provided method or function."},
        {"Arg2In", {F}, "Matches on the 2nd index argument for the provided method or function."},
        {"Arg3In", {F}, "Matches on the 3rd index argument for the provided method or function."},
        {"Arg4In", {F}, "Matches on the 4th index argument for the provided method or function."},
        {"Arg5In", {F}, "Matches on the 5th index argument for the provided method or function."},
        {"Arg6In", {F}, "Matches on the 6th index argument for the provided method or function."},
        {"Arg7In", {F}, "Matches on the 7th index argument for the provided method or function."},
        {"BooleanLiteral", {V}, "Matches on boolean type literals."},
        {"CallExpression", {C}, "Matches when a given name is called."},
        {"DataFlowAfter", {Q}, "Matches on entities that happen after in the dataflow of its parameter."},
        {"DataFlowsFrom", {Q}, "Matches on places which a taint data can flow from."},
        {"DataFlowsInto", {Q}, "Matches on places which a taint data can flow into."},
        {"ExplicitSelfParamIn", {D}, "Matches on the explicit receiver parameter (e.g., self in Python and Rust) for the provided method or function declaration."},
        {"ForSameObject", {Q}, "Matches on entities that happen on the same object as its parameter."},
        {"HasAnnotation", {A}, "Matches on entities annotated by a given annotation."},
        {"HasAnyArg", {V}, "Matches on entities that take any argument with the provided value."},
        {"HasArg0", {V}, "Matches on entities that take an argument in the 0th index (i.e. receiver object for method calls) with the provided value."},
        {"HasArg1", {V}, "Matches on entities that take an argument in the 1st index with the provided value."},
        {"HasArg2", {V}, "Matches on entities that take an argument in the 2nd index with the provided value."},
        {"HasArg3", {V}, "Matches on entities that take an argument in the 3rd index with the provided value."},
        {"HasArg4", {V}, "Matches on entities that take an argument in the 4th index with the provided value."},
        {"HasArg5", {V}, "Matches on entities that take an argument in the 5th index with the provided value."},
        {"HasArg6", {V}, "Matches on entities that take an argument in the 6th index with the provided value."},
        {"HasArg7", {V}, "Matches on entities that take an argument in the 7th index with the provided value."},
        {"HasNamedArg", {N, V}, "Matches on entities that take a named argument with the provided value."},
        {"Identifier", {Q}, "Matches on an identifier."},
        {"InPath", {P}, "Matches on entities in the source file with the provided path."},
        {"Literal", {V}, "Matches on string/boolean or number type literals."},
        {"NamedArgIn", {N, F}, "Matches on the named argument for the provided method or function."},
        {"Not", {Q}, "A negation. Matches only if the argument does not match."},
        {"NumberLiteral", {V}, "Matches on numeric type literals."},
        {"Or", {Q, Q}, "A binary disjunction. Matches if either (or both) arguments match."},
        {"Param1In", {D}, "Matches on the 1st parameter for the provided method or function declaration."},
        {"Param2In", {D}, "Matches on the 2nd parameter for the provided method or function declaration."},
        {"Param3In", {D}, "Matches on the 3rd parameter for the provided method or function declaration."},
        {"Param4In", {D}, "Matches on the 4th parameter for the provided method or function declaration."},
        {"Param5In", {D}, "Matches on the 5th parameter for the provided method or function declaration."},
        {"Param6In", {D}, "Matches on the 6th parameter for the provided method or function declaration."},
        {"Param7In", {D}, "Matches on the 7th parameter for the provided method or function declaration."},
        {"ReturnedBy", {Q}, "Matches on the returned entity."},
        {"Returns", {Q}, "Matches on the entity (e.g. a function or a method) that returns the value provided as argument."},
        {"StringLiteral", {V}, "Matches on string type literals."},
        {"Taint", {Q, Q, Q}, "Identify data propagation flows that start at the specified source(s) and reach the designated destination sinks (like vulnerable methods) without going through the specified sanitizer(s)."},
    };
    std::vector<StdlibEntry> out;
    for (auto& [n, d] : predicates) out.push_back({n, EntryKind::Predicate, {}, d});
    for (auto& t : templates) out.push_back({t.name, EntryKind::Template, t.params, t.doc});
    std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.name < b.name; });
    return out;
}

inline std::string build_source() {
    std::ostringstream s;
    s << ".kind __call CallExpression.\n"
         ".kind __ident Identifier.\n"
         ".kind __string StringLiteral.\n"
         ".kind __number NumberLiteral.\n"
         ".kind __bool BooleanLiteral.\n"
         ".kind __fndecl FunctionDecl.\n\n"
         "template And(a, b) { t(X) :- a(X), b(X). }\n"
         "template Or(a, b) { t(X) :- a(X). t(X) :- b(X). }\n"
         "template Not(p) { t(X) :- !p(X). }\n"
         "template CallExpression(p) { t(X) :- __call(X), p(X). }\n"
         "template FunctionDecl(p) { t(X) :- __fndecl(X), p(X). }\n"
         "template Identifier(p) { t(X) :- __ident(X), p(X). }\n"
         "template StringLiteral(v) { t(X) :- __string(X), v(X). }\n"
         "template NumberLiteral(v) { t(X) :- __number(X), v(X). }\n"
         "template BooleanLiteral(v) { t(X) :- __bool(X), v(X). }\n"
         "template Literal(v) { t(X) :- __string(X), v(X). t(X) :- __number(X), v(X). t(X) :- __bool(X), v(X). }\n";
    for (int i = 0; i < 8; ++i) {
        s << "template Arg" << i << "In(f) { t(X) :- arg" << i << "(Y, X), f(Y). }\n";
        s << "template HasArg" << i << "(v) { t(X) :- arg" << i << "(X, Y), v(Y). }\n";
    }
    for (int i = 1; i < 8; ++i) s << "template Param" << i << "In(f) { t(X) :- param" << i << "(Y, X), f(Y). }\n";
    s << "template ExplicitSelfParamIn(f) { t(X) :- param_self(Y, X), f(Y). }\n";
    s << "template AnyParamIn(f) {";
    for (int i = 1; i < 8; ++i) s << " t(X) :- param" << i << "(Y, X), f(Y).";
    s << " t(X) :- param_self(Y, X), f(Y). }\n";
    s << "template HasAnyArg(v) {";
    for (int i = 0; i < 8; ++i) s << " t(X) :- arg" << i << "(X, Y), v(Y).";
    s << " t(X) :- named_arg(X, Y), v(Y). }\n";
    s << "template HasNamedArg(n, v) { t(X) :- named_arg(X, Y), n(Y), v(Y). }\n"
         "template NamedArgIn(n, f) { t(X) :- named_arg(Y, X), f(Y), n(X). }\n"
         "template DataFlowAfter(p) { t(X) :- dataflow(Y, X), p(Y). t(X) :- dataflow(Y, X), t(Y). }\n"
         "template DataFlowsFrom(s) { t(X) :- taint(Y, X), s(Y). t(X) :- taint(Y, X), t(Y). }\n"
         "template DataFlowsInto(k) { t(X) :- taint(X, Y), k(Y). t(X) :- taint(X, Y), t(Y). }\n"
         "template ForSameObject(p) { t(X) :- same_object(X, Y), p(Y). }\n"
         "template HasAnnotation(a) { t(X) :- annotated_by(X, Y), a(Y). }\n"
         "template InPath(f) { t(X) :- in_file(X, Y), f(Y). }\n"
         "template Returns(p) { t(X) :- returns(X, Y), p(Y). }\n"
         "template ReturnedBy(p) { t(X) :- returned_by(X, Y), p(Y). }\n"
         "template Taint(src, san, sink) -> result {\n"
         "    reach(X) :- src(X).\n"
         "    reach(X) :- taint(Y, X), pass(Y).\n"
         "    pass(Y) :- src(Y).\n"
         "    pass(Y) :- reach(Y), !san(Y).\n"
         "    result(X) :- sink(X), reach(X).\n"
         "}\n";
    return s.str();
}

}  // namespace detail

/// Every standard-library name, sorted.
inline const std::vector<StdlibEntry>& stdlib() {
    static const std::vector<StdlibEntry> entries = detail::build_stdlib();
    return entries;
}

inline const StdlibEntry* lookup(std::string_view name) {
    auto& all = stdlib();
    auto it = std::lower_bound(all.begin(), all.end(), name, [](auto& e, std::string_view n) { return e.name < n; });
    return it != all.end() && it->name == name ? &*it : nullptr;
}

/// StarLang text of the template library.
inline const std::string& stdlib_source() {
    static const std::string text = detail::build_source();
    return text;
}

inline const starlang::Program& stdlib_program() {
    static const starlang::Program prog = starlang::parse_starlang(stdlib_source());
    return prog;
}

/// The template a stdlib entry expands to, when it has one.
inline const starlang::TemplateDef* expansion(const StdlibEntry& e) {
    auto& t = stdlib_program().templates;
    auto it = t.find(e.name);
    return it == t.end() ? nullptr : &it->second;
}

/// Binds a predicate name either to a node tag (an EDB unary relation) or
/// to a Codesearch sub-query.
struct PredicateBinding {
    std::optional<std::string> tag;
    std::optional<std::string> query;

    friend bool operator==(const PredicateBinding&, const PredicateBinding&) = default;
};

struct PredicateConfig {
    std::map<std::string, PredicateBinding> predicates;

    bool binds(const std::string& name) const { return predicates.count(name) > 0; }

    static PredicateConfig from_json(const nlohmann::json& doc) {
        PredicateConfig cfg;
        if (!doc.is_object() || !doc.contains("predicates") || !doc["predicates"].is_object())
            throw LoadError("config: expected an object with a \"predicates\" object");
        for (auto& [name, v] : doc["predicates"].items()) {
            PredicateBinding b;
            if (v.contains("tag")) b.tag = v["tag"].get<std::string>();
            if (v.contains("query")) b.query = v["query"].get<std::string>();
            if (b.tag.has_value() == b.query.has_value())
                throw LoadError("config: predicate '" + name + "' needs exactly one of \"tag\" or \"query\"");
            cfg.predicates.emplace(name, std::move(b));
        }
        return cfg;
    }

    nlohmann::json to_json() const {
        nlohmann::json preds = nlohmann::json::object();
        for (auto& [name, b] : predicates) {
            if (b.tag) preds[name] = {{"tag", *b.tag}};
            else preds[name] = {{"query", *b.query}};
        }
        return {{"predicates", preds}};
    }

    friend bool operator==(const PredicateConfig&, const PredicateConfig&) = default;
};

inline PredicateConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open config " + path);
    try {
        return PredicateConfig::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw LoadError("config " + path + ": " + e.what());
    }
}

/// Bindings for the security predicates used by the bundled case studies.
/// Every other security predicate stays unconfigured.
inline const PredicateConfig& demo_config() {
    static const PredicateConfig cfg = PredicateConfig::from_json(nlohmann::json::parse(R"({
        "predicates": {
            "AnySource": {"query": "Param1In<HasAnnotation<~\"^Http(Get|Post|Put)$\">>"},
            "SourceServer": {"query": "PRED:AnySource"},
            "SourceContainsSensitiveData": {"query": "HasAnnotation<\"Sensitive\">"},
            "SqliSanitizer": {"query": "CallExpression<~\"[Ss]anitize|[Ee]scape\">"},
            "SqliSink": {"query": "CallExpression<~\"SqlCommand$\">"}
        }
    })"));
    return cfg;
}

}  // namespace starquery::codesearch
