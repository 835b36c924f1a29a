#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hpw/extrapolation.hpp"
#include "hpw/observables.hpp"

// Plain-CSV artifacts with a '#'-prefixed key=value metadata block followed
// by one header line.  Files are written atomically (temp file + rename) and
// numbers carry full precision, so identical runs produce identical bytes.

namespace hpw {

struct CsvParseError : std::runtime_error {
  int line;
  CsvParseError(const std::string& what, int line_number)
      : std::runtime_error(what + " (line " + std::to_string(line_number) + ")"),
        line(line_number) {}
};

struct MetadataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace csv {

using Metadata = std::map<std::string, std::string>;

std::string format_double(double v);

void atomic_write(const std::string& path, const std::string& content);

// T-matrix tables --------------------------------------------------------

void write_tmatrix(const std::string& path, const TMatrixTable& table, const Metadata& extra);
TMatrixTable read_tmatrix(const std::string& path, Metadata* meta = nullptr);

// Corrected tables: pair label, the three inputs, T*, and the error-model
// coefficients, one row per channel pair.
void write_corrected(const std::string& path, const TMatrixTable& t1, const TMatrixTable& t2,
                     const TMatrixTable& t3, const CorrectedTable& corrected,
                     const Metadata& extra);

// SDCS curves -------------------------------------------------------------

void write_sdcs(const std::string& path, const SdcsCurve& curve, const Metadata& extra);
SdcsCurve read_sdcs(const std::string& path, Metadata* meta = nullptr);

// Small extras ------------------------------------------------------------

void write_amplitudes(const std::string& path, const AmplitudeVector& amp,
                      const ChannelBasis& basis, const Metadata& extra);
void write_coupling(const std::string& path, const Eigen::MatrixXd& values, const Metadata& extra);

}  // namespace csv
}  // namespace hpw
