#include "oblique/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <Eigen/SVD>

namespace oblique {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidParam: return "InvalidParam";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NotCertified: return "NotCertified";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

namespace {

double parse_double(const std::string& token) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw Error(ErrorCode::ParseError, "not a number: '" + token + "'");
  return value;
}

}  // namespace

Matrix read_matrix(std::istream& in) {
  std::string line;
  Index rows = -1;
  Index cols = -1;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream header(line);
    if (!(header >> rows >> cols) || rows < 0 || cols < 0)
      throw Error(ErrorCode::ParseError, "bad matrix header: '" + line + "'");
    break;
  }
  if (rows < 0) throw Error(ErrorCode::ParseError, "empty matrix file");

  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    if (!std::getline(in, line))
      throw Error(ErrorCode::ParseError, "expected " + std::to_string(rows) + " rows");
    std::istringstream row(line);
    std::string token;
    Index c = 0;
    while (row >> token) {
      if (c >= cols) throw Error(ErrorCode::ParseError, "too many columns in row " + std::to_string(r));
      m(r, c++) = parse_double(token);
    }
    if (c != cols) throw Error(ErrorCode::ParseError, "too few columns in row " + std::to_string(r));
  }
  return m;
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_matrix(in);
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string format_significant(double x, int digits) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, digits);
  return std::string(buf, ptr);
}

void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_matrix(out, m);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace oblique
