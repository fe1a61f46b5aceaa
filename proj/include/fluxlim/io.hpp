#pragma once

#include <array>
#include <string>
#include <vector>

#include "fluxlim/diagnostics.hpp"
#include "fluxlim/grid.hpp"

namespace fluxlim {

/// diag.csv: a '#' comment line (schema, domain volume, column list), the
/// CSV header, then one row per record with 17 significant digits.
std::string diag_csv(const std::vector<DiagRecord>& records, double volume);

struct DiagFile {
  std::vector<DiagRecord> records;
  double volume = 1.0;
};
DiagFile parse_diag_csv(const std::string& text);
DiagFile read_diag_csv(const std::string& path);

/// Raw snapshot: 64-byte ASCII header "FLXSNAP1 <dim> <N0> <N1> <N2> <field> <t>"
/// padded with spaces and ending in '\n', then little-endian float64 values
/// in storage order.
void write_snapshot(const std::string& path, const ScalarField& f, const std::string& field, double t);
struct Snapshot {
  int dim = 0;
  std::array<int, 3> cells{1, 1, 1};
  std::string field;
  double t = 0.0;
  std::vector<double> values;
};
Snapshot read_snapshot(const std::string& path);

/// Legacy ASCII VTK (STRUCTURED_POINTS) with n, c, m as cell data and the
/// face velocity averaged to cell centres.
void write_vtk(const std::string& path, const StateSnapshot& s);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace fluxlim
