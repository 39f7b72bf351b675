#include "sparseconv/sparse_vector.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sparseconv/errors.hpp"

namespace sparseconv {
namespace {

// Strict ASCII-decimal parse of the whole token.
template <typename T>
bool parse_int(std::string_view tok, T& out) {
  if (tok.empty()) return false;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

}  // namespace

u64 SparseVector::max_index() const {
  return entries.empty() ? 0 : entries.back().index;
}

u64 SparseVector::max_abs_value() const {
  u64 m = 0;
  // Two's-complement negate in unsigned arithmetic; |INT64_MIN| would
  // overflow a signed negate.
  for (const auto& e : entries) {
    const u64 mag = e.value < 0 ? ~static_cast<u64>(e.value) + 1 : static_cast<u64>(e.value);
    m = std::max(m, mag);
  }
  return m;
}

bool SparseVector::contains(u64 index) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), index,
                             [](const SparseEntry& e, u64 i) { return e.index < i; });
  return it != entries.end() && it->index == index;
}

void validate_sparse_vector(const SparseVector& v) {
  for (std::size_t i = 0; i < v.entries.size(); ++i) {
    const auto& e = v.entries[i];
    if (e.value == 0) throw EngineError("sparse vector holds a zero value");
    if (e.index >= v.length) throw EngineError("sparse vector index exceeds declared length");
    if (i > 0 && v.entries[i - 1].index >= e.index)
      throw EngineError("sparse vector entries not strictly ascending");
  }
}

SparseVector parse_sparse_vector(std::istream& in) {
  SparseVector v;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  std::vector<SparseEntry> raw;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.front() == '#') continue;
    if (!have_header) {
      if (line.size() < 3 || line[0] != 'N' || line[1] != ' ')
        throw ParseError("expected \"N <length>\"", lineno);
      u64 len = 0;
      if (!parse_int(std::string_view(line).substr(2), len))
        throw ParseError("bad length", lineno);
      v.length = len;
      have_header = true;
      continue;
    }
    auto sp = line.find(' ');
    if (sp == std::string::npos || sp == 0 || sp + 1 >= line.size())
      throw ParseError("expected \"<index> <value>\"", lineno);
    u64 idx = 0;
    i64 val = 0;
    if (!parse_int(std::string_view(line).substr(0, sp), idx))
      throw ParseError("bad index", lineno);
    if (!parse_int(std::string_view(line).substr(sp + 1), val))
      throw ParseError("bad value", lineno);
    if (idx >= v.length)
      throw ParseError("index " + std::to_string(idx) + " >= declared length " +
                           std::to_string(v.length),
                       lineno);
    if (val == 0) continue;
    raw.push_back({idx, val});
  }
  if (!have_header) throw ParseError("missing \"N <length>\" header", lineno + 1);

  std::stable_sort(raw.begin(), raw.end(),
                   [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (i > 0 && raw[i].index == raw[i - 1].index) {
      if (raw[i].value != raw[i - 1].value)
        throw ParseError("duplicate index " + std::to_string(raw[i].index) +
                             " with conflicting values",
                         0);
      continue;  // exact duplicate, keep one
    }
    v.entries.push_back(raw[i]);
  }
  return v;
}

SparseVector parse_sparse_vector(const std::string& text) {
  std::istringstream in(text);
  return parse_sparse_vector(in);
}

SparseVector load_sparse_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_sparse_vector(in);
}

std::string serialize_sparse_vector(const SparseVector& v) {
  std::ostringstream out;
  write_sparse_vector(out, v);
  return out.str();
}

void write_sparse_vector(std::ostream& out, const SparseVector& v) {
  out << "N " << v.length << "\n";
  for (const auto& e : v.entries) out << e.index << " " << e.value << "\n";
}

}  // namespace sparseconv
