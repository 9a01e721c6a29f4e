#include "json_node.hpp"

namespace semvox::io::detail {

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigurationError(what + ": invalid JSON (" + e.what() + ")");
  }
}

Node::Node(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) throw ConfigurationError(path_ + ": expected an object");
}

bool Node::has(const std::string& key) const {
  return j_.contains(key) && !j_.at(key).is_null();
}

void Node::fail(const std::string& key, const std::string& message) const {
  throw ConfigurationError(path_ + "." + key + ": " + message);
}

const Json& Node::field(const std::string& key) const {
  if (!j_.contains(key)) fail(key, "missing required field");
  used_.insert(key);
  return j_.at(key);
}

const Json& Node::raw(const std::string& key) const { return field(key); }

double Node::number(const std::string& key) const {
  const Json& v = field(key);
  if (!v.is_number()) fail(key, "expected a number");
  return v.get<double>();
}

double Node::number(const std::string& key, double fallback) const {
  used_.insert(key);
  return has(key) ? number(key) : fallback;
}

long long Node::integer(const std::string& key) const {
  const Json& v = field(key);
  if (!v.is_number_integer()) fail(key, "expected an integer");
  return v.get<long long>();
}

long long Node::integer(const std::string& key, long long fallback) const {
  used_.insert(key);
  return has(key) ? integer(key) : fallback;
}

std::uint64_t Node::unsigned_integer(const std::string& key) const {
  const Json& v = field(key);
  if (!v.is_number_unsigned()) fail(key, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

bool Node::boolean(const std::string& key, bool fallback) const {
  used_.insert(key);
  if (!has(key)) return fallback;
  const Json& v = field(key);
  if (!v.is_boolean()) fail(key, "expected true or false");
  return v.get<bool>();
}

std::string Node::string(const std::string& key) const {
  const Json& v = field(key);
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

std::string Node::string(const std::string& key, const std::string& fallback) const {
  used_.insert(key);
  return has(key) ? string(key) : fallback;
}

std::vector<double> Node::numbers(const std::string& key) const {
  const Json& v = field(key);
  if (!v.is_array()) fail(key, "expected an array of numbers");
  std::vector<double> out;
  for (const Json& e : v) {
    if (!e.is_number()) fail(key, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Vec3 Node::vec3(const std::string& key) const {
  const auto v = numbers(key);
  if (v.size() != 3) fail(key, "expected 3 numbers");
  return {v[0], v[1], v[2]};
}

Node Node::object(const std::string& key) const {
  const Json& v = field(key);
  if (!v.is_object()) fail(key, "expected an object");
  return Node(v, path_ + "." + key);
}

std::vector<Node> Node::objects(const std::string& key) const {
  used_.insert(key);
  std::vector<Node> out;
  if (!has(key)) return out;
  const Json& v = field(key);
  if (!v.is_array()) fail(key, "expected an array");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_object()) fail(key + "[" + std::to_string(i) + "]", "expected an object");
    out.emplace_back(v[i], path_ + "." + key + "[" + std::to_string(i) + "]");
  }
  return out;
}

void Node::finish() const {
  for (const auto& [k, v] : j_.items()) {
    if (!used_.count(k)) fail(k, "unknown field");
  }
}

}  // namespace semvox::io::detail
