#include "fairmarket/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fm {

namespace {

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

// Maps the JSON pointer of every value to the line where it starts. Only run
// on text that already parsed, so the scanner can assume valid JSON.
class LineIndex {
 public:
  explicit LineIndex(std::string_view text) : text_(text) {
    skip_ws();
    if (pos_ < text_.size()) value("");
  }

  std::optional<int> line_of(const std::string& pointer) const {
    auto it = lines_.find(pointer);
    if (it == lines_.end()) return std::nullopt;
    return it->second;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r' || text_[pos_] == '\n')) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  std::string string() {
    std::string out;
    ++pos_;  // opening quote
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\') {
        out += text_[pos_++];
      }
      out += text_[pos_++];
    }
    ++pos_;
    // Keys with escapes are compared through nlohmann's decoding.
    return Json::parse("\"" + out + "\"").get<std::string>();
  }

  void value(const std::string& pointer) {
    lines_.emplace(pointer, line_);
    const char c = text_[pos_];
    if (c == '{') {
      ++pos_;
      skip_ws();
      if (text_[pos_] == '}') {
        ++pos_;
        return;
      }
      while (true) {
        skip_ws();
        const std::string key = string();
        skip_ws();
        ++pos_;  // ':'
        skip_ws();
        value(pointer + "/" + escape_token(key));
        skip_ws();
        if (text_[pos_++] == '}') return;
      }
    } else if (c == '[') {
      ++pos_;
      skip_ws();
      if (text_[pos_] == ']') {
        ++pos_;
        return;
      }
      for (std::size_t i = 0;; ++i) {
        skip_ws();
        value(pointer + "/" + std::to_string(i));
        skip_ws();
        if (text_[pos_++] == ']') return;
      }
    } else if (c == '"') {
      string();
    } else {
      while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '}' && text_[pos_] != ']' &&
             text_[pos_] != ' ' && text_[pos_] != '\n' && text_[pos_] != '\r' && text_[pos_] != '\t') {
        ++pos_;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::map<std::string, int> lines_;
};

class Reader {
 public:
  Reader(std::string_view text, std::string_view source) : source_(source), index_(text) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
    std::ostringstream os;
    os << source_;
    if (auto line = index_.line_of(pointer)) os << ":" << *line;
    os << ": " << (pointer.empty() ? "/" : pointer) << ": " << message;
    throw ParseError(os.str());
  }

  void only_keys(const Json& obj, const std::string& pointer, std::initializer_list<const char*> allowed) const {
    if (!obj.is_object()) fail(pointer, "expected an object");
    for (const auto& [key, _] : obj.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) fail(pointer + "/" + escape_token(key), "unknown field '" + key + "'");
    }
  }

  const Json& require(const Json& obj, const std::string& pointer, const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail(pointer, std::string("missing field '") + key + "'");
    return *it;
  }

  double number(const Json& v, const std::string& pointer) const {
    if (!v.is_number()) fail(pointer, "expected a number");
    return v.get<double>();
  }

  std::string string(const Json& v, const std::string& pointer) const {
    if (!v.is_string()) fail(pointer, "expected a string");
    return v.get<std::string>();
  }

  const Json& array(const Json& v, const std::string& pointer) const {
    if (!v.is_array()) fail(pointer, "expected an array");
    return v;
  }

 private:
  std::string source_;
  LineIndex index_;
};

std::string line_col(std::string_view text, std::size_t byte) {
  int line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

}  // namespace

const Claim& MarketDocument::claim(std::string_view name) const {
  for (const Claim& c : claims) {
    if (c.name() == name) return c;
  }
  throw ModelError("no claim named '" + std::string(name) + "'");
}

MarketDocument parse_market_text(std::string_view text, std::string_view source) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string(source) + ":" + line_col(text, e.byte == 0 ? 0 : e.byte - 1) +
                     ": syntax error: " + e.what());
  }
  const Reader rd(text, source);
  rd.only_keys(doc, "", {"format_version", "tree", "assets", "claims", "metadata"});

  const Json& version = rd.require(doc, "", "format_version");
  if (!version.is_number_integer() || version.get<int>() != kFormatVersion) {
    rd.fail("/format_version", "unsupported format version (expected " + std::to_string(kFormatVersion) + ")");
  }

  // Tree.
  const Json& tree_json = rd.array(rd.require(doc, "", "tree"), "/tree");
  std::vector<NodeSpec> specs;
  for (std::size_t k = 0; k < tree_json.size(); ++k) {
    const std::string p = "/tree/" + std::to_string(k);
    const Json& e = tree_json[k];
    rd.only_keys(e, p, {"id", "parent", "prob"});
    NodeSpec s;
    s.id = rd.string(rd.require(e, p, "id"), p + "/id");
    const Json& parent = rd.require(e, p, "parent");
    if (!parent.is_null()) s.parent = rd.string(parent, p + "/parent");
    s.prob = rd.number(rd.require(e, p, "prob"), p + "/prob");
    specs.push_back(std::move(s));
  }
  ScenarioTree tree;
  try {
    tree = ScenarioTree::create(specs);
  } catch (const ModelError& e) {
    rd.fail("/tree", e.what());
  }

  // Assets.
  const Json& assets_json = rd.array(rd.require(doc, "", "assets"), "/assets");
  Matrix prices(assets_json.size(), tree.size());
  std::vector<std::string> names;
  for (std::size_t i = 0; i < assets_json.size(); ++i) {
    const std::string p = "/assets/" + std::to_string(i);
    const Json& a = assets_json[i];
    rd.only_keys(a, p, {"name", "prices"});
    names.push_back(rd.string(rd.require(a, p, "name"), p + "/name"));
    const Json& map = rd.require(a, p, "prices");
    if (!map.is_object()) rd.fail(p + "/prices", "expected an object mapping node ids to prices");
    std::vector<bool> seen(tree.size(), false);
    for (const auto& [id, v] : map.items()) {
      const std::string vp = p + "/prices/" + escape_token(id);
      const auto n = tree.find(id);
      if (!n) rd.fail(vp, "unknown node id '" + id + "'");
      prices(i, *n) = rd.number(v, vp);
      seen[*n] = true;
    }
    for (NodeIndex n = 0; n < tree.size(); ++n) {
      if (!seen[n]) rd.fail(p + "/prices", "missing price for node '" + tree.id(n) + "'");
    }
  }
  MarketDocument out;
  try {
    out.model = build_market(tree, std::move(prices), names);
  } catch (const ModelError& e) {
    rd.fail("/assets", e.what());
  }

  // Claims.
  if (auto it = doc.find("claims"); it != doc.end()) {
    const Json& claims = rd.array(*it, "/claims");
    std::set<std::string> claim_names;
    for (std::size_t k = 0; k < claims.size(); ++k) {
      const std::string p = "/claims/" + std::to_string(k);
      const Json& c = claims[k];
      rd.only_keys(c, p, {"name", "payoff"});
      std::string name = rd.string(rd.require(c, p, "name"), p + "/name");
      if (!claim_names.insert(name).second) rd.fail(p + "/name", "duplicate claim name '" + name + "'");
      const Json& map = rd.require(c, p, "payoff");
      if (!map.is_object()) rd.fail(p + "/payoff", "expected an object mapping leaf ids to payoffs");
      std::vector<double> payoff(tree.leaves().size(), 0.0);
      std::vector<bool> seen(payoff.size(), false);
      for (const auto& [id, v] : map.items()) {
        const std::string vp = p + "/payoff/" + escape_token(id);
        const auto n = tree.find(id);
        if (!n) rd.fail(vp, "unknown node id '" + id + "'");
        if (!tree.is_leaf(*n)) rd.fail(vp, "node '" + id + "' is not a leaf");
        payoff[tree.leaf_position(*n)] = rd.number(v, vp);
        seen[tree.leaf_position(*n)] = true;
      }
      for (std::size_t l = 0; l < seen.size(); ++l) {
        if (!seen[l]) rd.fail(p + "/payoff", "missing payoff for leaf '" + tree.id(tree.leaves()[l]) + "'");
      }
      try {
        out.claims.emplace_back(std::move(payoff), std::move(name));
      } catch (const ModelError& e) {
        rd.fail(p + "/payoff", e.what());
      }
    }
  }

  if (auto it = doc.find("metadata"); it != doc.end()) {
    if (!it->is_object()) rd.fail("/metadata", "expected an object");
    out.metadata = *it;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot read '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

MarketDocument parse_market(const std::filesystem::path& path) {
  return parse_market_text(read_file(path), path.string());
}

Json market_to_json(const MarketModel& model, std::span<const Claim> claims, const Json& metadata) {
  const auto& tree = model.tree();
  Json doc = Json::object();
  doc["format_version"] = kFormatVersion;
  Json nodes = Json::array();
  for (const NodeSpec& s : tree.specs()) {
    Json e = Json::object();
    e["id"] = s.id;
    e["parent"] = s.parent ? Json(*s.parent) : Json(nullptr);
    e["prob"] = s.prob;
    nodes.push_back(std::move(e));
  }
  doc["tree"] = std::move(nodes);
  Json assets = Json::array();
  for (std::size_t i = 0; i < model.assets(); ++i) {
    Json prices = Json::object();
    for (NodeIndex n = 0; n < tree.size(); ++n) prices[tree.id(n)] = model.price(i, n);
    assets.push_back(Json{{"name", model.asset_name(i)}, {"prices", std::move(prices)}});
  }
  doc["assets"] = std::move(assets);
  Json cl = Json::array();
  for (const Claim& c : claims) {
    Json payoff = Json::object();
    for (std::size_t k = 0; k < c.size(); ++k) payoff[tree.id(tree.leaves()[k])] = c[k];
    cl.push_back(Json{{"name", c.name()}, {"payoff", std::move(payoff)}});
  }
  doc["claims"] = std::move(cl);
  if (metadata.is_object()) doc["metadata"] = metadata;
  return doc;
}

std::string serialize_market(const MarketModel& model, std::span<const Claim> claims, const Json& metadata) {
  return market_to_json(model, claims, metadata).dump(2) + "\n";
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fm
