#include "ncfair/sdp.hpp"

#include "ncfair/error.hpp"

namespace ncfair::sdp {

void AffineForm::add(std::size_t var, double coeff) {
  if (coeff == 0.0) return;
  auto [it, inserted] = coeffs.try_emplace(var, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) coeffs.erase(it);
  }
}

double AffineForm::evaluate(const std::vector<double>& y) const {
  double v = constant;
  for (const auto& [i, c] : coeffs) v += c * y.at(i);
  return v;
}

AffineForm& SymmetricBlock::at(std::size_t row, std::size_t col) {
  if (row > col) std::swap(row, col);
  return entries[{row, col}];
}

const AffineForm* SymmetricBlock::find(std::size_t row, std::size_t col) const {
  if (row > col) std::swap(row, col);
  auto it = entries.find({row, col});
  return it == entries.end() ? nullptr : &it->second;
}

void SymmetricBlock::prune() {
  std::erase_if(entries, [](const auto& kv) { return kv.second.is_zero(); });
}

void SDPProblem::validate() const {
  if (objective.size() != num_vars)
    throw ValidationError("objective has " + std::to_string(objective.size()) +
                          " entries for " + std::to_string(num_vars) + " variables");
  if (!variable_names.empty() && variable_names.size() != num_vars)
    throw ValidationError("variable_names length does not match num_vars");
  if (blocks.empty()) throw ValidationError("problem has no PSD blocks");
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const auto& blk = blocks[j];
    if (blk.dim == 0) throw ValidationError("block " + std::to_string(j) + " has dimension 0");
    for (const auto& [rc, form] : blk.entries) {
      if (rc.first > rc.second || rc.second >= blk.dim)
        throw ValidationError("block " + std::to_string(j) + " entry out of range");
      for (const auto& [var, c] : form.coeffs) {
        (void)c;
        if (var >= num_vars)
          throw ValidationError("block " + std::to_string(j) + " references variable " +
                                std::to_string(var));
      }
    }
  }
  for (const auto& eq : equalities)
    for (const auto& [var, c] : eq.coeffs) {
      (void)c;
      if (var >= num_vars)
        throw ValidationError("equality references variable " + std::to_string(var));
    }
}

bool SDPProblem::same_structure(const SDPProblem& other) const {
  return num_vars == other.num_vars && objective == other.objective &&
         blocks == other.blocks && equalities == other.equalities;
}

Eigen::MatrixXd evaluate_block(const SymmetricBlock& block, const std::vector<double>& y) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(block.dim, block.dim);
  for (const auto& [rc, form] : block.entries) {
    const double v = form.evaluate(y);
    m(rc.first, rc.second) = v;
    m(rc.second, rc.first) = v;
  }
  return m;
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::inaccurate: return "inaccurate";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

}  // namespace ncfair::sdp
