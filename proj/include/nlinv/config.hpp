#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "nlinv/experiments.hpp"
#include "nlinv/io.hpp"
#include "nlinv/lowerbound.hpp"

namespace nlinv {

// Kernel, grid, spaces, forward operator and reference point shared by every command.
struct Problem {
  Kernel kernel;
  GridPtr grid;
  H1SpacePtr h1;
  H2SpacePtr h2;
  std::shared_ptr<const ForwardOp> op;
  H1Vec fbar;
};

// Reads the keys kernel, grid, h1_norm, operator and fbar from root.
// Relative file paths (theta tables) resolve against base_dir.
Problem read_problem(ObjectReader& root, const std::filesystem::path& base_dir);

// {"family": "holder", "r": .., "domain_cap": ..} or {"family": "log_type", "p": .., "nu": .., "domain_cap": ..}.
IndexFunction read_index_function(ObjectReader r);
SolveOptions read_solve_options(ObjectReader r);
// phi, R, g_seed, g_norm, profile, fixedpoint_tol, fixedpoint_iters.
SourceSpec read_source_spec(ObjectReader r);
// ms, replicates, noise_sigma, noise_model, lambda_rule, b, fixed_lambdas, eta. phi, R and seed come from elsewhere.
RateStudyConfig read_rate_study(ObjectReader r);

// {"constant": c} or {"values": [...]} with one value per grid node.
H1Vec read_h1_vector(ObjectReader r, const H1SpacePtr& space);

Json index_function_to_json(const IndexFunction& phi);

}  // namespace nlinv
