#include "hpw/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hpw/version.hpp"

namespace hpw::csv {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::string basis_to_string(const ChannelBasis& basis) {
  std::string s;
  for (int n : basis.degrees()) {
    if (!s.empty()) s += ',';
    s += std::to_string(n);
  }
  return s;
}

ChannelBasis basis_from_string(Symmetry sym, const std::string& text) {
  std::vector<int> degrees;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) degrees.push_back(std::stoi(item));
  return ChannelBasis(sym, std::move(degrees));
}

void put_meta(std::ostringstream& os, const Metadata& meta) {
  os << "# tool=hpw " << version_string << "\n";
  for (const auto& [k, v] : meta) os << "# " << k << "=" << v << "\n";
}

// Reads the metadata block and the header line; leaves the stream at the
// first data row and returns its line number.
int read_preamble(std::istream& in, Metadata& meta, std::string& header, int& line_no) {
  std::string line;
  header.clear();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("#", 0) == 0) {
      std::string body = line.substr(1);
      const auto eq = body.find('=');
      if (eq != std::string::npos) {
        std::string key = body.substr(0, eq);
        std::string value = body.substr(eq + 1);
        while (!key.empty() && key.front() == ' ') key.erase(key.begin());
        while (!key.empty() && key.back() == ' ') key.pop_back();
        meta[key] = value;
      }
      continue;
    }
    header = line;
    break;
  }
  if (header.empty()) throw CsvParseError("missing header line", line_no);
  return line_no;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

double to_double(const std::string& s, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw CsvParseError("malformed number '" + s + "'", line_no);
  }
}

int to_int(const std::string& s, int line_no) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw CsvParseError("malformed integer '" + s + "'", line_no);
  }
}

std::string require(const Metadata& meta, const std::string& key) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw MetadataError("missing metadata key '" + key + "'");
  return it->second;
}

}  // namespace

void write_tmatrix(const std::string& path, const TMatrixTable& table, const Metadata& extra) {
  std::ostringstream os;
  Metadata meta = extra;
  meta["kind"] = "tmatrix";
  meta["symmetry"] = to_string(table.basis.symmetry());
  meta["basis"] = basis_to_string(table.basis);
  meta["energy_ry"] = format_double(table.energy_ry);
  meta["h"] = format_double(table.h);
  meta["provenance"] = table.provenance;
  put_meta(os, meta);
  os << "P,n,np,re,im\n";
  const int N = table.basis.size();
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      os << table.pair_label(i, j) << ',' << table.basis.degrees()[i] << ','
         << table.basis.degrees()[j] << ',' << format_double(table.t(i, j).real()) << ','
         << format_double(table.t(i, j).imag()) << "\n";
  atomic_write(path, os.str());
}

TMatrixTable read_tmatrix(const std::string& path, Metadata* meta_out) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Metadata meta;
  std::string header;
  int line_no = 0;
  read_preamble(in, meta, header, line_no);
  if (require(meta, "kind") != "tmatrix")
    throw MetadataError(path + ": not a tmatrix file (kind=" + meta["kind"] + ")");
  const Symmetry sym = symmetry_from_string(require(meta, "symmetry"));
  ChannelBasis basis = basis_from_string(sym, require(meta, "basis"));
  const int N = basis.size();

  TMatrixTable table{basis, to_double(require(meta, "energy_ry"), line_no),
                     to_double(require(meta, "h"), line_no), meta["provenance"],
                     Eigen::MatrixXcd::Zero(N, N)};
  Eigen::MatrixXd seen = Eigen::MatrixXd::Zero(N, N);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.rfind("#", 0) == 0) continue;
    const auto cells = split_row(line);
    if (cells.size() != 5) throw CsvParseError("expected 5 columns", line_no);
    const int n = to_int(cells[1], line_no);
    const int np = to_int(cells[2], line_no);
    const auto& degrees = basis.degrees();
    const auto it1 = std::find(degrees.begin(), degrees.end(), n);
    const auto it2 = std::find(degrees.begin(), degrees.end(), np);
    if (it1 == degrees.end() || it2 == degrees.end())
      throw CsvParseError("degree outside the declared basis", line_no);
    const int i = static_cast<int>(it1 - degrees.begin());
    const int j = static_cast<int>(it2 - degrees.begin());
    table.t(i, j) = {to_double(cells[3], line_no), to_double(cells[4], line_no)};
    seen(i, j) = 1.0;
  }
  if (seen.sum() != N * N) throw MetadataError(path + ": incomplete pair table");
  if (meta_out) *meta_out = meta;
  return table;
}

void write_corrected(const std::string& path, const TMatrixTable& t1, const TMatrixTable& t2,
                     const TMatrixTable& t3, const CorrectedTable& corrected,
                     const Metadata& extra) {
  std::ostringstream os;
  Metadata meta = extra;
  meta["kind"] = "corrected_tmatrix";
  meta["symmetry"] = to_string(corrected.table.basis.symmetry());
  meta["basis"] = basis_to_string(corrected.table.basis);
  meta["energy_ry"] = format_double(corrected.table.energy_ry);
  meta["h1"] = format_double(corrected.steps.h1);
  meta["h2"] = format_double(corrected.steps.h2);
  meta["h3"] = format_double(corrected.steps.h3);
  meta["unit"] = format_double(corrected.steps.unit);
  put_meta(os, meta);
  os << "P,n,np,re_h1,im_h1,re_h2,im_h2,re_h3,im_h3,re_star,im_star,re_A,im_A,re_B,im_B\n";
  const int N = corrected.table.basis.size();
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      os << corrected.table.pair_label(i, j) << ',' << corrected.table.basis.degrees()[i] << ','
         << corrected.table.basis.degrees()[j];
      for (const auto* t : {&t1.t, &t2.t, &t3.t, &corrected.table.t, &corrected.a_coeff,
                            &corrected.b_coeff}) {
        os << ',' << format_double((*t)(i, j).real()) << ',' << format_double((*t)(i, j).imag());
      }
      os << "\n";
    }
  atomic_write(path, os.str());
}

void write_sdcs(const std::string& path, const SdcsCurve& curve, const Metadata& extra) {
  std::ostringstream os;
  Metadata meta = extra;
  meta["kind"] = "sdcs";
  meta["symmetry"] = to_string(curve.symmetry);
  meta["energy_ry"] = format_double(curve.energy_ry);
  meta["provenance"] = curve.provenance;
  meta["kappa"] = format_double(curve.kappa);
  meta["samples"] = std::to_string(curve.fractions.size());
  put_meta(os, meta);
  os << "fraction,value,symmetry,energy_Ry,h_or_corrected,kappa\n";
  for (std::size_t i = 0; i < curve.fractions.size(); ++i) {
    os << format_double(curve.fractions[i]) << ',' << format_double(curve.values[i]) << ','
       << to_string(curve.symmetry) << ',' << format_double(curve.energy_ry) << ','
       << curve.provenance << ',' << format_double(curve.kappa) << "\n";
  }
  atomic_write(path, os.str());
}

SdcsCurve read_sdcs(const std::string& path, Metadata* meta_out) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Metadata meta;
  std::string header;
  int line_no = 0;
  read_preamble(in, meta, header, line_no);
  SdcsCurve curve;
  if (meta.count("kind") && meta["kind"] != "sdcs")
    throw MetadataError(path + ": not an sdcs file (kind=" + meta["kind"] + ")");
  if (meta.count("symmetry")) curve.symmetry = symmetry_from_string(meta["symmetry"]);
  if (meta.count("energy_ry")) curve.energy_ry = to_double(meta["energy_ry"], line_no);
  if (meta.count("provenance")) curve.provenance = meta["provenance"];
  if (meta.count("kappa")) curve.kappa = to_double(meta["kappa"], line_no);

  std::string line;
  double prev = -1.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.rfind("#", 0) == 0) continue;
    const auto cells = split_row(line);
    if (cells.size() < 2) throw CsvParseError("expected at least fraction,value", line_no);
    const double f = to_double(cells[0], line_no);
    if (!(f >= 0.0 && f <= 1.0)) throw CsvParseError("fraction outside [0, 1]", line_no);
    if (f <= prev) throw CsvParseError("fractions must be strictly increasing", line_no);
    prev = f;
    curve.fractions.push_back(f);
    curve.values.push_back(to_double(cells[1], line_no));
  }
  if (curve.fractions.size() < 2) throw CsvParseError("sdcs needs at least two samples", line_no);
  if (meta_out) *meta_out = meta;
  return curve;
}

void write_amplitudes(const std::string& path, const AmplitudeVector& amp,
                      const ChannelBasis& basis, const Metadata& extra) {
  if (basis.size() != amp.c.size())
    throw std::invalid_argument("write_amplitudes: basis/amplitude size mismatch");
  std::ostringstream os;
  Metadata meta = extra;
  meta["kind"] = "amplitudes";
  meta["symmetry"] = to_string(amp.symmetry);
  meta["basis"] = basis_to_string(basis);
  meta["energy_ry"] = format_double(amp.energy_ry);
  put_meta(os, meta);
  os << "n,re_c,im_c\n";
  for (int i = 0; i < amp.c.size(); ++i)
    os << basis.degrees()[i] << ',' << format_double(amp.c(i).real()) << ','
       << format_double(amp.c(i).imag()) << "\n";
  atomic_write(path, os.str());
}

void write_coupling(const std::string& path, const Eigen::MatrixXd& values, const Metadata& extra) {
  std::ostringstream os;
  Metadata meta = extra;
  meta["kind"] = "coupling";
  put_meta(os, meta);
  os << "row,col,value\n";
  for (int i = 0; i < values.rows(); ++i)
    for (int j = 0; j < values.cols(); ++j)
      os << i << ',' << j << ',' << format_double(values(i, j)) << "\n";
  atomic_write(path, os.str());
}

}  // namespace hpw::csv
