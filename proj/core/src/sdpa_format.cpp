#include "ncfair/sdpa_format.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ncfair/error.hpp"

namespace ncfair::sdp {
namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct LineReader {
  std::istream& in;
  std::size_t line_no = 0;

  /// Next non-empty line; leading comment lines are only allowed before the
  /// first data line.
  bool next(std::string& line, bool allow_comments) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos) continue;
      if (allow_comments && (line[first] == '"' || line[first] == '*')) continue;
      return true;
    }
    return false;
  }
};

std::vector<std::string> tokens(std::string line) {
  for (char& ch : line)
    if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string t; ss >> t;) out.push_back(t);
  return out;
}

double parse_double(const std::string& tok, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || errno == ERANGE)
    throw ParseError(line, "expected a number, got '" + tok + "'");
  return v;
}

long long parse_int(const std::string& tok, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size() || errno == ERANGE)
    throw ParseError(line, "expected an integer, got '" + tok + "'");
  return v;
}

}  // namespace

void write_sparse_sdpa(const SDPProblem& prob, std::ostream& out) {
  prob.validate();
  const bool has_eq = !prob.equalities.empty();
  out << prob.num_vars << '\n';
  out << prob.blocks.size() + (has_eq ? 1 : 0) << '\n';
  for (std::size_t j = 0; j < prob.blocks.size(); ++j) out << (j ? " " : "") << prob.blocks[j].dim;
  if (has_eq) out << ' ' << -2 * static_cast<long long>(prob.equalities.size());
  out << '\n';
  for (std::size_t i = 0; i < prob.num_vars; ++i) out << (i ? " " : "") << fmt17(prob.objective[i]);
  out << '\n';

  for (std::size_t j = 0; j < prob.blocks.size(); ++j) {
    for (const auto& [rc, form] : prob.blocks[j].entries) {
      const std::string pos =
          std::to_string(j + 1) + ' ' + std::to_string(rc.first + 1) + ' ' + std::to_string(rc.second + 1);
      if (form.constant != 0.0) out << "0 " << pos << ' ' << fmt17(-form.constant) << '\n';
      for (const auto& [var, c] : form.coeffs) out << var + 1 << ' ' << pos << ' ' << fmt17(c) << '\n';
    }
  }
  const std::size_t eq_block = prob.blocks.size() + 1;
  for (std::size_t r = 0; r < prob.equalities.size(); ++r) {
    const auto& eq = prob.equalities[r];
    const std::size_t plus = 2 * r + 1, minus = 2 * r + 2;
    auto emit = [&](std::size_t matno, double v) {
      out << matno << ' ' << eq_block << ' ' << plus << ' ' << plus << ' ' << fmt17(v) << '\n';
      out << matno << ' ' << eq_block << ' ' << minus << ' ' << minus << ' ' << fmt17(-v) << '\n';
    };
    if (eq.rhs != 0.0) emit(0, eq.rhs);
    for (const auto& [var, c] : eq.coeffs) emit(var + 1, c);
  }
}

void export_sparse_sdpa(const SDPProblem& prob, const std::filesystem::path& path) {
  prob.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_sparse_sdpa(prob, out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

SDPProblem read_sparse_sdpa(std::istream& in) {
  LineReader reader{in};
  std::string line;

  bool first = true;
  auto header = [&](const char* what) {
    const bool allow_comments = std::exchange(first, false);
    if (!reader.next(line, allow_comments))
      throw ParseError(reader.line_no + 1, std::string("missing ") + what);
    return tokens(line);
  };

  auto t = header("number of variables");
  if (t.size() != 1) throw ParseError(reader.line_no, "expected the number of variables");
  const long long m = parse_int(t[0], reader.line_no);
  if (m < 0) throw ParseError(reader.line_no, "negative number of variables");

  t = header("block count");
  if (t.size() != 1) throw ParseError(reader.line_no, "expected the number of blocks");
  const long long nblocks = parse_int(t[0], reader.line_no);
  if (nblocks < 1) throw ParseError(reader.line_no, "need at least one block");

  t = header("block structure");
  if (static_cast<long long>(t.size()) != nblocks)
    throw ParseError(reader.line_no, "expected " + std::to_string(nblocks) + " block sizes");
  std::vector<long long> dims;
  for (const auto& tok : t) {
    const long long d = parse_int(tok, reader.line_no);
    if (d == 0) throw ParseError(reader.line_no, "block size 0");
    dims.push_back(d);
  }
  const bool has_eq = dims.back() < 0;
  for (std::size_t j = 0; j + 1 < dims.size(); ++j)
    if (dims[j] < 0)
      throw ParseError(reader.line_no, "only the last block may be diagonal (equality block)");
  if (has_eq && (-dims.back()) % 2 != 0)
    throw ParseError(reader.line_no, "equality block must have even size");
  const std::size_t structure_line = reader.line_no;
  if (has_eq && nblocks == 1) throw ParseError(structure_line, "no PSD block besides the equality block");

  t = header("objective");
  if (static_cast<long long>(t.size()) != m)
    throw ParseError(reader.line_no, "expected " + std::to_string(m) + " objective coefficients");

  SDPProblem prob;
  prob.num_vars = static_cast<std::size_t>(m);
  for (const auto& tok : t) prob.objective.push_back(parse_double(tok, reader.line_no));
  const std::size_t npsd = has_eq ? dims.size() - 1 : dims.size();
  for (std::size_t j = 0; j < npsd; ++j) prob.blocks.push_back({static_cast<std::size_t>(dims[j]), {}});
  const std::size_t neq = has_eq ? static_cast<std::size_t>(-dims.back()) / 2 : 0;
  prob.equalities.resize(neq);

  // Diagonal values of the equality block, keyed by (matno, diagonal index).
  std::map<std::pair<long long, long long>, std::pair<double, std::size_t>> diag;

  while (reader.next(line, false)) {
    const std::size_t ln = reader.line_no;
    t = tokens(line);
    if (t.size() != 5) throw ParseError(ln, "expected 'matno blkno i j value'");
    const long long mat = parse_int(t[0], ln), blk = parse_int(t[1], ln);
    long long i = parse_int(t[2], ln), j = parse_int(t[3], ln);
    const double v = parse_double(t[4], ln);
    if (mat < 0 || mat > m) throw ParseError(ln, "matrix number out of range");
    if (blk < 1 || blk > nblocks) throw ParseError(ln, "block number out of range");
    if (i > j) std::swap(i, j);
    const long long bdim = std::abs(dims[blk - 1]);
    if (i < 1 || j > bdim) throw ParseError(ln, "entry index out of range");

    if (has_eq && blk == nblocks) {
      if (i != j) throw ParseError(ln, "off-diagonal entry in diagonal block");
      if (!diag.emplace(std::make_pair(mat, i), std::make_pair(v, ln)).second)
        throw ParseError(ln, "duplicate entry");
      continue;
    }
    auto& form = prob.blocks[blk - 1].at(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1));
    if (mat == 0) {
      if (form.constant != 0.0) throw ParseError(ln, "duplicate entry");
      form.constant = -v;
    } else {
      if (!form.coeffs.emplace(static_cast<std::size_t>(mat - 1), v).second)
        throw ParseError(ln, "duplicate entry");
    }
  }
  for (auto& blk : prob.blocks) {
    for (auto& [rc, form] : blk.entries)
      std::erase_if(form.coeffs, [](const auto& kv) { return kv.second == 0.0; });
    blk.prune();
  }

  for (const auto& [key, val] : diag) {
    const auto [mat, idx] = key;
    const auto [v, ln] = val;
    const long long partner = idx % 2 == 1 ? idx + 1 : idx - 1;
    auto it = diag.find({mat, partner});
    if (it == diag.end() || it->second.first != -v)
      throw ParseError(ln, "equality block entries must come in (+v, -v) pairs");
    if (idx % 2 == 0 || v == 0.0) continue;
    auto& eq = prob.equalities[static_cast<std::size_t>((idx - 1) / 2)];
    if (mat == 0) eq.rhs = v;
    else eq.coeffs.emplace(static_cast<std::size_t>(mat - 1), v);
  }
  for (std::size_t i = 0; i < prob.num_vars; ++i) prob.variable_names.push_back("y" + std::to_string(i));
  return prob;
}

SDPProblem import_sparse_sdpa(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_sparse_sdpa(in);
}

}  // namespace ncfair::sdp
