#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fw {

inline constexpr const char* kToolVersion = "0.1.0";

// Deterministic formatting: %.12g everywhere, "-0" folded to "0".
std::string format_double(double x);

// Ordered JSON tree for output manifests.  Insertion order is preserved so
// emission is byte-stable; parsing of user input files is delegated to a
// general-purpose parser elsewhere.
struct JsonValue;
using JsonArray = std::vector<JsonValue>;

struct JsonObject {
  std::vector<std::pair<std::string, JsonValue>> members;
  JsonValue& set(const std::string& key, JsonValue v);
  const JsonValue* find(const std::string& key) const;
};

struct JsonValue {
  std::variant<std::nullptr_t, bool, int64_t, double, std::string, JsonArray,
               JsonObject>
      v;
  JsonValue() : v(nullptr) {}
  JsonValue(std::nullptr_t) : v(nullptr) {}
  JsonValue(bool b) : v(b) {}
  JsonValue(int i) : v(int64_t(i)) {}
  JsonValue(long long i) : v(int64_t(i)) {}
  JsonValue(uint64_t i) : v(int64_t(i)) {}
  JsonValue(double d) : v(d) {}
  JsonValue(const char* s) : v(std::string(s)) {}
  JsonValue(std::string s) : v(std::move(s)) {}
  JsonValue(JsonArray a) : v(std::move(a)) {}
  JsonValue(JsonObject o) : v(std::move(o)) {}
};

std::string dump_json(const JsonValue& v, int indent = 2);

// A reported scalar carries where its expected value comes from:
// "paper" (quoted reference value), "trivial" (forced by definitions),
// or "derived-oracle" (computed by an independent method in this tool).
JsonObject tagged(double value, const std::string& provenance);
JsonObject tagged(double value, const std::string& provenance, double expected);

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string comment;  // emitted as a leading "# ..." line when nonempty
  void add_row(std::vector<std::string> cells);
  std::string dump() const;
};

std::string csv_cell(double x);

uint64_t fnv1a64(std::string_view s);

bool write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);  // throws on failure

}  // namespace fw
