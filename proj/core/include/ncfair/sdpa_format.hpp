#pragma once

/// \file
/// Sparse SDPA text format ("dat-s") for SDPProblem.
///
/// Layout:
///
///     <number of variables>
///     <number of blocks>
///     <block sizes, negative for diagonal blocks>
///     <objective coefficients c_1 ... c_m>
///     <matno> <blkno> <i> <j> <value>      one line per nonzero, i <= j
///
/// SDPA reads each block as F_1 x_1 + ... + F_m x_m - F_0, so a constant C in
/// one of our blocks is written as matrix 0 with value -C. The linear
/// equalities A y = b are appended as one trailing diagonal block holding the
/// pairs (a_r'y - b_r, -(a_r'y - b_r)). Indices are 1-based and floats are
/// printed with 17 significant digits, which makes import(export(p)) exact.

#include <filesystem>
#include <iosfwd>

#include "ncfair/sdp.hpp"

namespace ncfair::sdp {

void write_sparse_sdpa(const SDPProblem& prob, std::ostream& out);
void export_sparse_sdpa(const SDPProblem& prob, const std::filesystem::path& path);

/// Throws ParseError (with line number) on malformed input. Variables are
/// labelled y0, y1, ... since the format carries no names.
SDPProblem read_sparse_sdpa(std::istream& in);
SDPProblem import_sparse_sdpa(const std::filesystem::path& path);

}  // namespace ncfair::sdp
