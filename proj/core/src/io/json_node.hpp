#pragma once

#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "semvox/common.hpp"

namespace semvox::io::detail {

using Json = nlohmann::ordered_json;

Json parse_json(const std::string& text, const std::string& what);

/// Read cursor over a JSON object that records which fields were consumed,
/// so unknown fields can be rejected with their path.
class Node {
 public:
  Node(const Json& j, std::string path);

  const std::string& path() const { return path_; }
  const Json& json() const { return j_; }
  bool has(const std::string& key) const;

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  long long integer(const std::string& key) const;
  long long integer(const std::string& key, long long fallback) const;
  std::uint64_t unsigned_integer(const std::string& key) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string(const std::string& key) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  Vec3 vec3(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;

  Node object(const std::string& key) const;
  std::vector<Node> objects(const std::string& key) const;
  /// Raw field access (marks it consumed).
  const Json& raw(const std::string& key) const;

  /// Throws for fields that were never read.
  void finish() const;

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  const Json& field(const std::string& key) const;

  const Json& j_;
  std::string path_;
  mutable std::set<std::string> used_;
};

}  // namespace semvox::io::detail
