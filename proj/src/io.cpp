#include "fluxlim/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fluxlim/error.hpp"

namespace fluxlim {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t to_le(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t y = 0;
    for (int i = 0; i < 8; ++i) y |= ((x >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return y;
  }
  return x;
}

}  // namespace

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("write to '" + path + "' failed");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string diag_csv(const std::vector<DiagRecord>& records, double volume) {
  std::string out = "# fluxlim diag schema=1 volume=" + fmt17(volume) + " columns=";
  std::string header;
  for (std::size_t i = 0; i < diag_columns().size(); ++i) header += (i ? "," : "") + diag_columns()[i];
  out += header + "\n" + header + "\n";
  for (const DiagRecord& r : records) {
    const std::vector<double> v = diag_values(r);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ',';
      out += fmt17(v[i]);
    }
    out += '\n';
  }
  return out;
}

DiagFile parse_diag_csv(const std::string& text) {
  DiagFile f;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("volume=");
      if (pos != std::string::npos) f.volume = std::strtod(line.c_str() + pos + 7, nullptr);
      continue;
    }
    if (!header_seen) {
      std::string expect;
      for (std::size_t i = 0; i < diag_columns().size(); ++i) expect += (i ? "," : "") + diag_columns()[i];
      if (line != expect) throw Error("diag.csv line " + std::to_string(lineno) + ": unexpected column header");
      header_seen = true;
      continue;
    }
    std::vector<double> v;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double x = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw Error("diag.csv line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      v.push_back(x);
    }
    if (v.size() != diag_columns().size())
      throw Error("diag.csv line " + std::to_string(lineno) + ": expected " + std::to_string(diag_columns().size()) +
                  " columns");
    f.records.push_back(diag_from_values(v));
  }
  if (!header_seen) throw Error("diag.csv: missing column header");
  return f;
}

DiagFile read_diag_csv(const std::string& path) { return parse_diag_csv(read_text(path)); }

void write_snapshot(const std::string& path, const ScalarField& f, const std::string& field, double t) {
  const GridSpec& g = f.grid;
  char hdr[65];
  std::snprintf(hdr, sizeof hdr, "FLXSNAP1 %d %d %d %d %s %.17g", g.dim(), g.cells(0), g.cells(1), g.cells(2),
                field.c_str(), t);
  std::string header(hdr);
  if (header.size() > 63) throw Error("snapshot header too long for field '" + field + "'");
  header.resize(63, ' ');
  header += '\n';
  std::string body(f.values.size() * 8, '\0');
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const std::uint64_t w = to_le(std::bit_cast<std::uint64_t>(f.values[i]));
    std::memcpy(body.data() + 8 * i, &w, 8);
  }
  write_text(path, header + body);
}

Snapshot read_snapshot(const std::string& path) {
  const std::string data = read_text(path);
  if (data.size() < 64 || data.compare(0, 9, "FLXSNAP1 ") != 0) throw Error("'" + path + "' is not a snapshot file");
  Snapshot s;
  std::istringstream hs(data.substr(9, 55));
  hs >> s.dim >> s.cells[0] >> s.cells[1] >> s.cells[2] >> s.field >> s.t;
  if (!hs) throw Error("'" + path + "': malformed snapshot header");
  const std::size_t count = static_cast<std::size_t>(s.cells[0]) * s.cells[1] * s.cells[2];
  if (data.size() != 64 + 8 * count) throw Error("'" + path + "': size does not match the header");
  s.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t w;
    std::memcpy(&w, data.data() + 64 + 8 * i, 8);
    s.values[i] = std::bit_cast<double>(to_le(w));
  }
  return s;
}

void write_vtk(const std::string& path, const StateSnapshot& s) {
  const GridSpec& g = s.grid();
  std::ostringstream os;
  os << "# vtk DataFile Version 3.0\nfluxlim t=" << fmt17(s.t) << "\nASCII\nDATASET STRUCTURED_POINTS\n";
  // VTK orders x fastest; our storage has axis 0 slowest, so axes are reversed.
  os << "DIMENSIONS " << g.cells(2) + 1 << ' ' << g.cells(1) + 1 << ' ' << g.cells(0) + 1 << "\n";
  os << "ORIGIN 0 0 0\nSPACING " << fmt17(g.h(2)) << ' ' << fmt17(g.h(1)) << ' ' << fmt17(g.h(0)) << "\n";
  os << "CELL_DATA " << g.size() << "\n";
  for (const auto& [name, f] : {std::pair<const char*, const ScalarField*>{"n", &s.n}, {"c", &s.c}, {"m", &s.m}}) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : f->values) os << fmt17(v) << '\n';
  }
  os << "VECTORS u double\n";
  const Extents& e = g.cell_extents();
  for (int i = 0; i < e.n[0]; ++i)
    for (int j = 0; j < e.n[1]; ++j)
      for (int k = 0; k < e.n[2]; ++k) {
        std::array<double, 3> uc{0.0, 0.0, 0.0};
        for (int a = 0; a < g.dim(); ++a) {
          const Extents& fe = g.face_extents(a);
          const std::size_t lo = fe.index(i, j, k);
          uc[a] = 0.5 * (s.u[a][lo] + s.u[a][lo + fe.stride[a]]);
        }
        os << fmt17(uc[2]) << ' ' << fmt17(uc[1]) << ' ' << fmt17(uc[0]) << '\n';
      }
  write_text(path, os.str());
}

}  // namespace fluxlim
