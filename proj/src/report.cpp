#include "fractalwalk/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fw {

std::string format_double(double x) {
  if (x == 0.0) return "0";  // fold -0
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

JsonValue& JsonObject::set(const std::string& key, JsonValue v) {
  for (auto& [k, val] : members)
    if (k == key) {
      val = std::move(v);
      return val;
    }
  members.emplace_back(key, std::move(v));
  return members.back().second;
}

const JsonValue* JsonObject::find(const std::string& key) const {
  for (auto& [k, val] : members)
    if (k == key) return &val;
  return nullptr;
}

namespace {

void escape_to(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void dump_to(std::string& out, const JsonValue& v, int indent, int depth) {
  const std::string pad(size_t(indent) * depth, ' ');
  const std::string pad1(size_t(indent) * (depth + 1), ' ');
  if (std::holds_alternative<std::nullptr_t>(v.v)) {
    out += "null";
  } else if (auto* b = std::get_if<bool>(&v.v)) {
    out += *b ? "true" : "false";
  } else if (auto* i = std::get_if<int64_t>(&v.v)) {
    out += std::to_string(*i);
  } else if (auto* d = std::get_if<double>(&v.v)) {
    double x = *d;
    if (std::isfinite(x))
      out += format_double(x);
    else  // JSON has no inf/nan literals
      escape_to(out, format_double(x));
  } else if (auto* s = std::get_if<std::string>(&v.v)) {
    escape_to(out, *s);
  } else if (auto* a = std::get_if<JsonArray>(&v.v)) {
    if (a->empty()) {
      out += "[]";
      return;
    }
    bool scalars = true;
    for (auto& e : *a)
      if (std::holds_alternative<JsonArray>(e.v) ||
          std::holds_alternative<JsonObject>(e.v))
        scalars = false;
    if (scalars && a->size() <= 16) {
      out += '[';
      for (size_t i = 0; i < a->size(); ++i) {
        if (i) out += ", ";
        dump_to(out, (*a)[i], indent, depth + 1);
      }
      out += ']';
      return;
    }
    out += "[\n";
    for (size_t i = 0; i < a->size(); ++i) {
      out += pad1;
      dump_to(out, (*a)[i], indent, depth + 1);
      if (i + 1 < a->size()) out += ',';
      out += '\n';
    }
    out += pad + "]";
  } else if (auto* o = std::get_if<JsonObject>(&v.v)) {
    if (o->members.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    for (size_t i = 0; i < o->members.size(); ++i) {
      out += pad1;
      escape_to(out, o->members[i].first);
      out += ": ";
      dump_to(out, o->members[i].second, indent, depth + 1);
      if (i + 1 < o->members.size()) out += ',';
      out += '\n';
    }
    out += pad + "}";
  }
}

}  // namespace

std::string dump_json(const JsonValue& v, int indent) {
  std::string out;
  dump_to(out, v, indent, 0);
  out += '\n';
  return out;
}

JsonObject tagged(double value, const std::string& provenance) {
  JsonObject o;
  o.set("value", value);
  o.set("provenance", provenance);
  return o;
}

JsonObject tagged(double value, const std::string& provenance, double expected) {
  JsonObject o;
  o.set("value", value);
  o.set("provenance", provenance);
  o.set("expected", expected);
  return o;
}

void Csv::add_row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }

std::string Csv::dump() const {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += r[i];
    }
    out += '\n';
  }
  return out;
}

std::string csv_cell(double x) { return format_double(x); }

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) return false;
  f.write(content.data(), std::streamsize(content.size()));
  return bool(f);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace fw
