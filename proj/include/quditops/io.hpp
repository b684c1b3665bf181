#pragma once

// Result files and snapshots.
//
// Text numbers are written with 17 significant digits so every double
// round-trips exactly. Binary snapshots are little-endian with a magic tag
// and a format version.

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "quditops/error.hpp"
#include "quditops/lanczos.hpp"
#include "quditops/operator_vector.hpp"

namespace quditops::io {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kArtifactVersion = "quditops 0.1.0";

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// 64-bit FNV-1a of `text` as 16 hex digits.
inline std::string fingerprint(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << content;
  if (!os) throw Error("write to '" + path + "' failed");
}

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

/// A numeric table with named columns and free-form comment lines.
struct Table {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline std::string to_csv(const Table& t) {
  std::ostringstream os;
  for (const auto& c : t.comments) os << "# " << c << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << '\n';
  }
  return os.str();
}

/// Whitespace-separated mirror of the CSV for gnuplot.
inline std::string to_dat(const Table& t) {
  std::ostringstream os;
  for (const auto& c : t.comments) os << "# " << c << '\n';
  os << '#';
  for (const auto& c : t.columns) os << ' ' << c;
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? " " : "") << format_double(row[i]);
    os << '\n';
  }
  return os.str();
}

/// Reads numeric rows from CSV or .dat text, skipping '#' lines and a header.
inline Table parse_table(const std::string& text) {
  Table t;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line.size() > 2 ? line.substr(2) : "");
      continue;
    }
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    bool numeric = true;
    while (ls >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (!t.rows.empty() || !t.columns.empty()) throw ParseError("non-numeric row: " + line);
      std::istringstream hs(line);
      while (hs >> tok) t.columns.push_back(tok);
      continue;
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void write_table(const std::string& csv_path, const Table& t) {
  write_file(csv_path, to_csv(t));
  std::string dat = csv_path;
  if (dat.size() > 4 && dat.compare(dat.size() - 4, 4, ".csv") == 0) dat.resize(dat.size() - 4);
  write_file(dat + ".dat", to_dat(t));
}

// ------------------------------------------------------------ operator text

inline std::string lattice_tag(const LatticeSpec& l) {
  switch (l.boundary) {
    case Boundary::thermodynamic: return l.dimension == 1 ? "chain" : "plane";
    case Boundary::ring: return "ring " + std::to_string(l.lx);
    case Boundary::torus: return "torus " + std::to_string(l.lx) + " " + std::to_string(l.ly);
  }
  return "?";
}

inline LatticeSpec parse_lattice_tag(const std::string& s) {
  std::istringstream is(s);
  std::string kind;
  is >> kind;
  if (kind == "chain") return LatticeSpec::chain();
  if (kind == "plane") return LatticeSpec::plane();
  int a = 0, b = 0;
  if (kind == "ring" && (is >> a)) return LatticeSpec::ring(a);
  if (kind == "torus" && (is >> a >> b)) return LatticeSpec::torus(a, b);
  throw ParseError("bad lattice tag '" + s + "'");
}

/// Header lines, then one "re im string" line per entry in storage order.
inline void write_operator_text(std::ostream& os, const OperatorVector& a) {
  os << "quditops-operator " << kSchemaVersion << '\n';
  os << "d " << a.d() << '\n';
  os << "lattice " << lattice_tag(a.space().lattice()) << '\n';
  os << "entries " << a.size() << '\n';
  const int dim = a.space().lattice().dimension;
  for (const auto& e : a.entries()) {
    os << format_double(e.amp.real()) << ' ' << format_double(e.amp.imag()) << ' '
       << to_string(a.space().decode(e.key), dim) << '\n';
  }
}

inline OperatorVector read_operator_text(std::istream& is) {
  std::string line, word;
  auto expect = [&](const std::string& key) {
    if (!std::getline(is, line)) throw ParseError("operator text: missing '" + key + "' line");
    std::istringstream ls(line);
    ls >> word;
    if (word != key) throw ParseError("operator text: expected '" + key + "', got '" + word + "'");
    std::string rest;
    std::getline(ls, rest);
    if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
    return rest;
  };
  if (std::stoi(expect("quditops-operator")) != kSchemaVersion) throw ParseError("operator text: unknown version");
  const int d = std::stoi(expect("d"));
  const LatticeSpec lattice = parse_lattice_tag(expect("lattice"));
  const auto count = std::stoull(expect("entries"));
  auto space = OperatorSpace::make(d, lattice);
  std::vector<Entry> entries;
  entries.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(is, line)) throw ParseError("operator text: truncated entry list");
    std::istringstream ls(line);
    double re = 0, im = 0;
    if (!(ls >> re >> im)) throw ParseError("operator text: bad amplitude in '" + line + "'");
    std::string rest;
    std::getline(ls, rest);
    entries.push_back({space->encode(parse_weyl_string(rest)), Complex(re, im)});
  }
  return OperatorVector::from_unsorted(space, std::move(entries));
}

// ---------------------------------------------------------- binary snapshot

namespace detail {

template <typename T>
void put(std::ostream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw ParseError("snapshot: unexpected end of data");
  return value;
}

inline void put_tag(std::ostream& os, const char (&tag)[5]) { os.write(tag, 4); }

inline void expect_tag(std::istream& is, const char (&tag)[5]) {
  std::array<char, 4> buf{};
  is.read(buf.data(), 4);
  if (!is || std::memcmp(buf.data(), tag, 4) != 0) throw ParseError(std::string("snapshot: missing tag ") + tag);
  if (get<std::uint32_t>(is) != kSchemaVersion) throw ParseError("snapshot: unsupported version");
}

inline void put_space(std::ostream& os, const OperatorSpace& s) {
  put<std::int32_t>(os, s.d());
  put<std::int32_t>(os, s.lattice().dimension);
  put<std::int32_t>(os, static_cast<std::int32_t>(s.lattice().boundary));
  put<std::int32_t>(os, s.lattice().lx);
  put<std::int32_t>(os, s.lattice().ly);
}

inline SpacePtr get_space(std::istream& is) {
  const int d = get<std::int32_t>(is);
  LatticeSpec l;
  l.dimension = get<std::int32_t>(is);
  const int b = get<std::int32_t>(is);
  if (b < 0 || b > 2) throw ParseError("snapshot: bad boundary");
  l.boundary = static_cast<Boundary>(b);
  l.lx = get<std::int32_t>(is);
  l.ly = get<std::int32_t>(is);
  return OperatorSpace::make(d, l);
}

inline void put_entries(std::ostream& os, const OperatorVector& a) {
  put<std::uint64_t>(os, a.size());
  for (const auto& e : a.entries()) {
    put<std::uint64_t>(os, static_cast<std::uint64_t>(e.key));
    put<std::uint64_t>(os, static_cast<std::uint64_t>(e.key >> 64));
    put<double>(os, e.amp.real());
    put<double>(os, e.amp.imag());
  }
}

inline OperatorVector get_entries(std::istream& is, SpacePtr space) {
  const auto count = get<std::uint64_t>(is);
  std::vector<Entry> entries;
  entries.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto lo = get<std::uint64_t>(is);
    const auto hi = get<std::uint64_t>(is);
    const double re = get<double>(is);
    const double im = get<double>(is);
    entries.push_back({(PackedKey(hi) << 64) | lo, Complex(re, im)});
  }
  return OperatorVector::from_sorted(std::move(space), std::move(entries));
}

}  // namespace detail

inline void write_operator_binary(std::ostream& os, const OperatorVector& a) {
  detail::put_tag(os, "QOPV");
  detail::put<std::uint32_t>(os, kSchemaVersion);
  detail::put_space(os, a.space());
  detail::put_entries(os, a);
}

inline OperatorVector read_operator_binary(std::istream& is) {
  detail::expect_tag(is, "QOPV");
  auto space = detail::get_space(is);
  return detail::get_entries(is, space);
}

/// (A_{n-1}, A_n, b list) in one file.
inline void write_checkpoint(std::ostream& os, const LanczosState& s) {
  detail::put_tag(os, "QLCK");
  detail::put<std::uint32_t>(os, kSchemaVersion);
  detail::put<std::int32_t>(os, s.n);
  detail::put<std::uint64_t>(os, s.initial_support);
  detail::put<std::uint64_t>(os, s.b.size());
  for (std::size_t i = 0; i < s.b.size(); ++i) {
    detail::put<double>(os, s.b[i]);
    detail::put<std::uint64_t>(os, s.support_sizes[i]);
  }
  detail::put_space(os, s.current.space());
  detail::put_entries(os, s.previous);
  detail::put_entries(os, s.current);
}

inline LanczosState read_checkpoint(std::istream& is) {
  detail::expect_tag(is, "QLCK");
  const int n = detail::get<std::int32_t>(is);
  const auto initial = detail::get<std::uint64_t>(is);
  const auto count = detail::get<std::uint64_t>(is);
  std::vector<double> b;
  std::vector<std::size_t> support;
  for (std::uint64_t i = 0; i < count; ++i) {
    b.push_back(detail::get<double>(is));
    support.push_back(detail::get<std::uint64_t>(is));
  }
  auto space = detail::get_space(is);
  auto previous = detail::get_entries(is, space);
  auto current = detail::get_entries(is, space);
  return LanczosState{n, std::move(b), std::move(support), initial, std::move(previous), std::move(current)};
}

}  // namespace quditops::io
