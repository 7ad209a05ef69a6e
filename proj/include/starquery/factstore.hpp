#pragma once

// The extensional database: a program-analysis graph with dense node ids,
// named unary relations and doubly-indexed binary relations.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "regex.hpp"

namespace starquery {

using NodeId = std::uint32_t;

enum class NodeKind {
    CallExpression,
    Identifier,
    StringLiteral,
    NumberLiteral,
    BooleanLiteral,
    FunctionDecl,
    Parameter,
    File,
    Annotation,
    Other,
};

inline constexpr std::array<std::string_view, 10> kNodeKindNames = {
    "CallExpression", "Identifier", "StringLiteral", "NumberLiteral", "BooleanLiteral",
    "FunctionDecl",   "Parameter",  "File",          "Annotation",    "Other",
};

/// Binary relations emitted by the frontends and cited by the standard library.
inline const std::vector<std::string>& edge_vocabulary() {
    static const std::vector<std::string> v = {
        "dataflow", "arg0",   "arg1",   "arg2",   "arg3",   "arg4",   "arg5",       "arg6",        "arg7",
        "named_arg", "param1", "param2", "param3", "param4", "param5", "param6",     "param7",      "param_self",
        "returns",  "returned_by", "annotated_by", "in_file", "same_object", "taint",
    };
    return v;
}

inline std::string_view kind_name(NodeKind k) { return kNodeKindNames[static_cast<std::size_t>(k)]; }

inline std::optional<NodeKind> parse_kind(std::string_view s) {
    for (std::size_t i = 0; i < kNodeKindNames.size(); ++i)
        if (kNodeKindNames[i] == s) return static_cast<NodeKind>(i);
    return std::nullopt;
}

/// A set of node ids over a fixed universe [0, universe). Membership is a
/// bitmap test; members() lists elements in insertion order.
class NodeSet {
public:
    NodeSet() = default;
    explicit NodeSet(std::size_t universe) : bits_((universe + 63) / 64, 0), universe_(universe) {}

    bool insert(NodeId id) {
        auto& word = bits_[id >> 6];
        std::uint64_t bit = std::uint64_t{1} << (id & 63);
        if (word & bit) return false;
        word |= bit;
        members_.push_back(id);
        return true;
    }
    bool contains(NodeId id) const {
        return id < universe_ && (bits_[id >> 6] >> (id & 63)) & 1;
    }
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    std::size_t universe() const { return universe_; }
    const std::vector<NodeId>& members() const { return members_; }

    std::vector<NodeId> sorted() const {
        auto out = members_;
        std::sort(out.begin(), out.end());
        return out;
    }
    /// O(size), not O(universe).
    void clear() {
        for (NodeId id : members_) bits_[id >> 6] = 0;
        members_.clear();
    }

    friend bool operator==(const NodeSet& a, const NodeSet& b) {
        return a.universe_ == b.universe_ && a.size() == b.size() &&
               std::all_of(a.members_.begin(), a.members_.end(), [&](NodeId id) { return b.contains(id); });
    }

private:
    std::vector<std::uint64_t> bits_;
    std::vector<NodeId> members_;
    std::size_t universe_ = 0;
};

struct NodeRecord {
    NodeId id = 0;
    std::int64_t external_id = 0;
    NodeKind kind = NodeKind::Other;
    std::map<std::string, std::string> attrs;

    const std::string* attr(const std::string& key) const {
        auto it = attrs.find(key);
        return it == attrs.end() ? nullptr : &it->second;
    }

    friend bool operator==(const NodeRecord&, const NodeRecord&) = default;
};

struct UnaryRelation {
    std::string name;
    NodeSet members;

    friend bool operator==(const UnaryRelation&, const UnaryRelation&) = default;
};

/// A set of (src, dst) pairs with CSR indexes on both columns.
class BinaryRelation {
public:
    BinaryRelation() = default;
    BinaryRelation(std::string name, std::vector<std::pair<NodeId, NodeId>> pairs, std::size_t universe)
        : name_(std::move(name)), pairs_(std::move(pairs)) {
        std::sort(pairs_.begin(), pairs_.end());
        pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
        build_index(universe, false, fwd_offsets_, fwd_targets_);
        build_index(universe, true, rev_offsets_, rev_targets_);
    }

    const std::string& name() const { return name_; }
    const std::vector<std::pair<NodeId, NodeId>>& pairs() const { return pairs_; }
    std::size_t size() const { return pairs_.size(); }

    std::span<const NodeId> successors(NodeId src) const { return slice(fwd_offsets_, fwd_targets_, src); }
    std::span<const NodeId> predecessors(NodeId dst) const { return slice(rev_offsets_, rev_targets_, dst); }

    bool contains(NodeId src, NodeId dst) const {
        auto s = successors(src);
        return std::binary_search(s.begin(), s.end(), dst);
    }
    std::size_t fwd_index_size() const { return fwd_targets_.size(); }
    std::size_t rev_index_size() const { return rev_targets_.size(); }

    friend bool operator==(const BinaryRelation& a, const BinaryRelation& b) {
        return a.name_ == b.name_ && a.pairs_ == b.pairs_;
    }

private:
    static std::span<const NodeId> slice(const std::vector<std::size_t>& offsets, const std::vector<NodeId>& targets,
                                         NodeId key) {
        if (static_cast<std::size_t>(key) + 1 >= offsets.size()) return {};
        return std::span<const NodeId>(targets).subspan(offsets[key], offsets[key + 1] - offsets[key]);
    }

    void build_index(std::size_t universe, bool reverse, std::vector<std::size_t>& offsets,
                     std::vector<NodeId>& targets) const {
        offsets.assign(universe + 1, 0);
        for (auto& [a, b] : pairs_) ++offsets[(reverse ? b : a) + 1];
        for (std::size_t i = 1; i <= universe; ++i) offsets[i] += offsets[i - 1];
        targets.resize(pairs_.size());
        std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
        for (auto& [a, b] : pairs_) {
            NodeId key = reverse ? b : a;
            targets[fill[key]++] = reverse ? a : b;
        }
        if (reverse)
            for (std::size_t i = 0; i < universe; ++i)
                std::sort(targets.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                          targets.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]));
    }

    std::string name_;
    std::vector<std::pair<NodeId, NodeId>> pairs_;
    std::vector<std::size_t> fwd_offsets_, rev_offsets_;
    std::vector<NodeId> fwd_targets_, rev_targets_;
};

/// How a literal is compared against an attribute value.
struct LiteralMatcher {
    enum class Kind { Exact, Regex };
    Kind kind = Kind::Exact;
    std::string text;

    static LiteralMatcher exact(std::string s) { return {Kind::Exact, std::move(s)}; }
    static LiteralMatcher regex(std::string s) { return {Kind::Regex, std::move(s)}; }

    friend bool operator==(const LiteralMatcher&, const LiteralMatcher&) = default;
};

struct DbStats {
    std::size_t active_domain = 0;   // T
    std::size_t relation_count = 0;  // k
    std::size_t max_relation = 0;    // m
};

class DatabaseBuilder;

/// Immutable after construction. The literal-relation cache is the only
/// mutable state and is guarded internally, so a const Database may be
/// shared freely across threads.
class Database {
public:
    Database() : cache_(std::make_unique<LiteralCache>()) {}
    Database(Database&&) noexcept = default;
    Database& operator=(Database&&) noexcept = default;

    std::size_t size() const { return nodes_.size(); }
    const std::vector<NodeRecord>& nodes() const { return nodes_; }
    const NodeRecord& node(NodeId id) const { return nodes_.at(id); }

    const std::map<std::string, UnaryRelation>& unary_relations() const { return unary_; }
    const std::map<std::string, BinaryRelation>& binary_relations() const { return binary_; }

    const UnaryRelation* unary(const std::string& name) const {
        auto it = unary_.find(name);
        return it == unary_.end() ? nullptr : &it->second;
    }
    const BinaryRelation* binary(const std::string& name) const {
        auto it = binary_.find(name);
        return it == binary_.end() ? nullptr : &it->second;
    }

    /// Nodes whose attribute `attr` equals `value`, ascending.
    std::span<const NodeId> nodes_with(const std::string& attr, const std::string& value) const {
        auto a = attr_index_.find(attr);
        if (a == attr_index_.end()) return {};
        auto v = a->second.find(value);
        if (v == a->second.end()) return {};
        return v->second;
    }
    /// Value -> nodes map for one attribute (empty if no node has it).
    const std::map<std::string, std::vector<NodeId>>& attribute_values(const std::string& attr) const {
        static const std::map<std::string, std::vector<NodeId>> none;
        auto a = attr_index_.find(attr);
        return a == attr_index_.end() ? none : a->second;
    }

    const NodeSet& nodes_of_kind(NodeKind k) const { return kinds_[static_cast<std::size_t>(k)]; }

    std::optional<NodeId> dense_id(std::int64_t external) const {
        auto it = remap_.find(external);
        if (it == remap_.end()) return std::nullopt;
        return it->second;
    }

    /// Nodes whose `attribute` matches. Exact lookups go through the attribute
    /// index; regexes scan the attribute's distinct values. Results are cached.
    std::shared_ptr<const UnaryRelation> materialize_literal_relation(const std::string& attribute,
                                                                      const LiteralMatcher& matcher) const {
        std::string key = attribute + (matcher.kind == LiteralMatcher::Kind::Exact ? "=" : "~") + matcher.text;
        {
            std::shared_lock lock(cache_->mutex);
            auto it = cache_->entries.find(key);
            if (it != cache_->entries.end()) return it->second;
        }
        auto rel = std::make_shared<UnaryRelation>();
        rel->name = key;
        rel->members = NodeSet(size());
        if (matcher.kind == LiteralMatcher::Kind::Exact) {
            for (NodeId id : nodes_with(attribute, matcher.text)) rel->members.insert(id);
        } else {
            auto re = re::Regex::compile(matcher.text);
            std::vector<NodeId> hits;
            for (auto& [value, ids] : attribute_values(attribute))
                if (re.search(value)) hits.insert(hits.end(), ids.begin(), ids.end());
            std::sort(hits.begin(), hits.end());
            for (NodeId id : hits) rel->members.insert(id);
        }
        std::unique_lock lock(cache_->mutex);
        auto [it, inserted] = cache_->entries.emplace(key, std::move(rel));
        return it->second;
    }

    std::size_t literal_cache_size() const {
        std::shared_lock lock(cache_->mutex);
        return cache_->entries.size();
    }

    friend bool operator==(const Database& a, const Database& b) {
        return a.nodes_ == b.nodes_ && a.unary_ == b.unary_ && a.binary_ == b.binary_;
    }

private:
    friend class DatabaseBuilder;

    struct LiteralCache {
        mutable std::shared_mutex mutex;
        std::unordered_map<std::string, std::shared_ptr<const UnaryRelation>> entries;
    };

    std::vector<NodeRecord> nodes_;
    std::map<std::string, UnaryRelation> unary_;
    std::map<std::string, BinaryRelation> binary_;
    std::map<std::string, std::map<std::string, std::vector<NodeId>>> attr_index_;
    std::array<NodeSet, kNodeKindNames.size()> kinds_;
    std::unordered_map<std::int64_t, NodeId> remap_;
    std::unique_ptr<LiteralCache> cache_;
};

/// Incrementally assembles a Database; build() validates and indexes.
class DatabaseBuilder {
public:
    /// Adds a node. `external_id` defaults to the dense id.
    NodeId add_node(NodeKind kind, std::map<std::string, std::string> attrs = {},
                    std::optional<std::int64_t> external_id = std::nullopt) {
        NodeId id = static_cast<NodeId>(nodes_.size());
        std::int64_t ext = external_id.value_or(static_cast<std::int64_t>(id));
        if (!remap_.emplace(ext, id).second)
            throw LoadError("node #" + std::to_string(id) + ": duplicate node id " + std::to_string(ext));
        for (const char* key : {"line", "col"}) {
            auto it = attrs.find(key);
            if (it != attrs.end() && !is_positive_int(it->second))
                throw LoadError("node " + std::to_string(ext) + ": attribute '" + key +
                                "' is not a positive integer: '" + it->second + "'");
        }
        nodes_.push_back(NodeRecord{id, ext, kind, std::move(attrs)});
        return id;
    }

    std::size_t size() const { return nodes_.size(); }
    NodeRecord& node(NodeId id) { return nodes_.at(id); }

    void declare_unary(const std::string& name) { unary_[name]; }
    void declare_binary(const std::string& name) { binary_[name]; }
    void add_unary(const std::string& name, NodeId id) { unary_[name].push_back(id); }
    void add_edge(const std::string& name, NodeId src, NodeId dst) { binary_[name].emplace_back(src, dst); }

    std::optional<NodeId> dense_id(std::int64_t external) const {
        auto it = remap_.find(external);
        if (it == remap_.end()) return std::nullopt;
        return it->second;
    }

    Database build() && {
        Database db;
        std::size_t n = nodes_.size();
        for (auto& [name, ids] : unary_) {
            UnaryRelation rel{name, NodeSet(n)};
            std::sort(ids.begin(), ids.end());
            for (NodeId id : ids) {
                check_id(id, "unary relation '" + name + "'");
                rel.members.insert(id);
            }
            db.unary_.emplace(name, std::move(rel));
        }
        for (auto& [name, pairs] : binary_) {
            for (auto& [a, b] : pairs) {
                check_id(a, "binary relation '" + name + "'");
                check_id(b, "binary relation '" + name + "'");
            }
            db.binary_.emplace(name, BinaryRelation(name, std::move(pairs), n));
        }
        for (auto& k : db.kinds_) k = NodeSet(n);
        for (auto& rec : nodes_) {
            db.kinds_[static_cast<std::size_t>(rec.kind)].insert(rec.id);
            for (auto& [key, value] : rec.attrs) db.attr_index_[key][value].push_back(rec.id);
        }
        db.nodes_ = std::move(nodes_);
        db.remap_ = std::move(remap_);
        return db;
    }

private:
    static bool is_positive_int(const std::string& s) {
        if (s.empty() || s.size() > 18) return false;
        if (!std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) return false;
        return std::stoll(s) > 0;
    }

    void check_id(NodeId id, const std::string& where) const {
        if (id >= nodes_.size()) throw LoadError(where + ": dangling node " + std::to_string(id));
    }

    std::vector<NodeRecord> nodes_;
    std::map<std::string, std::vector<NodeId>> unary_;
    std::map<std::string, std::vector<std::pair<NodeId, NodeId>>> binary_;
    std::unordered_map<std::int64_t, NodeId> remap_;
};

// --- facts file (JSON) ------------------------------------------------------

inline Database load_database(const nlohmann::json& doc) {
    using nlohmann::json;
    if (!doc.is_object()) throw LoadError("facts document must be a JSON object");
    DatabaseBuilder builder;

    auto nodes = doc.find("nodes");
    if (nodes == doc.end() || !nodes->is_array()) throw LoadError("facts document: missing \"nodes\" array");
    std::size_t index = 0;
    for (auto& n : *nodes) {
        std::string where = "node #" + std::to_string(index++);
        if (!n.is_object()) throw LoadError(where + ": not an object");
        auto id = n.find("id");
        if (id == n.end() || !id->is_number_integer()) throw LoadError(where + ": missing integer \"id\"");
        where = "node " + std::to_string(id->get<std::int64_t>());
        auto kind_it = n.find("kind");
        if (kind_it == n.end() || !kind_it->is_string()) throw LoadError(where + ": missing \"kind\"");
        auto kind = parse_kind(kind_it->get<std::string>());
        if (!kind) throw LoadError(where + ": unknown kind '" + kind_it->get<std::string>() + "'");
        std::map<std::string, std::string> attrs;
        if (auto a = n.find("attrs"); a != n.end()) {
            if (!a->is_object()) throw LoadError(where + ": \"attrs\" must be an object");
            for (auto& [key, value] : a->items()) {
                if (value.is_string()) attrs[key] = value.get<std::string>();
                else if (value.is_number_integer()) attrs[key] = std::to_string(value.get<std::int64_t>());
                else throw LoadError(where + ": attribute '" + key + "' must be a string");
            }
        }
        if (builder.dense_id(id->get<std::int64_t>()))
            throw LoadError(where + ": duplicate node id " + std::to_string(id->get<std::int64_t>()));
        builder.add_node(*kind, std::move(attrs), id->get<std::int64_t>());
    }

    auto resolve = [&](const json& v, const std::string& where) -> NodeId {
        if (!v.is_number_integer()) throw LoadError(where + ": node reference must be an integer");
        auto dense = builder.dense_id(v.get<std::int64_t>());
        if (!dense) throw LoadError(where + ": dangling node " + std::to_string(v.get<std::int64_t>()));
        return *dense;
    };

    if (auto u = doc.find("unary"); u != doc.end()) {
        if (!u->is_object()) throw LoadError("\"unary\" must be an object");
        for (auto& [name, ids] : u->items()) {
            std::string where = "unary relation '" + name + "'";
            if (!ids.is_array()) throw LoadError(where + ": must be an array");
            builder.declare_unary(name);
            for (auto& v : ids) builder.add_unary(name, resolve(v, where));
        }
    }
    if (auto b = doc.find("binary"); b != doc.end()) {
        if (!b->is_object()) throw LoadError("\"binary\" must be an object");
        for (auto& [name, pairs] : b->items()) {
            std::string where = "binary relation '" + name + "'";
            if (!pairs.is_array()) throw LoadError(where + ": must be an array");
            builder.declare_binary(name);
            std::size_t k = 0;
            for (auto& p : pairs) {
                std::string at = where + " pair #" + std::to_string(k++);
                if (!p.is_array() || p.size() != 2) throw LoadError(at + ": must be [src, dst]");
                builder.add_edge(name, resolve(p[0], at), resolve(p[1], at));
            }
        }
    }
    return std::move(builder).build();
}

inline Database load_database(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw LoadError(std::string("malformed facts document: ") + e.what());
    }
    return load_database(doc);
}

inline Database load_database_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open facts file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_database(std::string_view(ss.str()));
}

/// Canonical facts document: nodes in dense order, relation members sorted.
inline nlohmann::json serialize(const Database& db) {
    using nlohmann::json;
    json nodes = json::array();
    for (auto& n : db.nodes()) {
        json attrs = json::object();
        for (auto& [k, v] : n.attrs) attrs[k] = v;
        nodes.push_back({{"id", n.external_id}, {"kind", std::string(kind_name(n.kind))}, {"attrs", attrs}});
    }
    json unary = json::object();
    for (auto& [name, rel] : db.unary_relations()) {
        json ids = json::array();
        for (NodeId id : rel.members.sorted()) ids.push_back(db.node(id).external_id);
        unary[name] = ids;
    }
    json binary = json::object();
    for (auto& [name, rel] : db.binary_relations()) {
        json pairs = json::array();
        for (auto& [a, b] : rel.pairs()) pairs.push_back({db.node(a).external_id, db.node(b).external_id});
        binary[name] = pairs;
    }
    return json{{"nodes", nodes}, {"unary", unary}, {"binary", binary}};
}

inline DbStats db_stats(const Database& db) {
    DbStats s;
    s.active_domain = db.size();
    s.relation_count = db.unary_relations().size() + db.binary_relations().size();
    for (auto& [_, r] : db.unary_relations()) s.max_relation = std::max(s.max_relation, r.members.size());
    for (auto& [_, r] : db.binary_relations()) s.max_relation = std::max(s.max_relation, r.size());
    return s;
}

}  // namespace starquery
