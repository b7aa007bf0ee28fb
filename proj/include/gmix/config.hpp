#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gmix/coupling.hpp"
#include "gmix/history.hpp"
#include "gmix/potential.hpp"

namespace gmix {

enum class ExperimentKind { mixing, correlations, fclt, chernoff, poisson, bounds, validate_lemmas };

std::string_view to_string(ExperimentKind kind);

/// Everything an experiment run needs, loaded from an INI file. See the
/// README for the key schema.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::bounds;
  std::uint64_t seed = 0;
  std::size_t replicates = 1000;
  int threads = 0;
  bool self_check = true;
  std::filesystem::path output_dir = "gmix-out";

  // [model]: either a concrete model or, for bound experiments, a bare profile.
  std::optional<PotentialModel> model;
  RegularityProfile profile;

  // [coupling]
  double beta = 1.0;
  CouplingMode mode = BlockMaximal{};
  std::uint64_t blocks = 20;
  History y = History({}, 0);
  History z = History({}, 1);
  std::vector<std::uint64_t> coords;

  // [bounds]
  std::size_t n_max = 10000;
  std::size_t fit_lo = 100;
  std::size_t fit_hi = 10000;
  std::uint64_t scan_width = 1000;
  double slope_tol = 0.10;

  // [analysis]
  std::vector<std::size_t> lags;
  std::size_t burn_in = 1000;
  std::size_t path_len = 10000;
  std::size_t n = 10000;
  std::vector<std::size_t> n_list;
  double t = 0.05;
  std::vector<double> h;      // depth-1 observable values
  std::vector<double> f;      // correlation observable f (depth 1)
  std::vector<double> fhat;   // correlation observable fhat (depth 1)
  std::optional<double> known_mean;
  double delta_prime = 0.5;
  double ks_tol = 0.05;
  double rate_tol = 0.25;
  double min_resolvable_z = 3.0;

  // [poisson]
  std::size_t k_lo = 10;
  std::size_t k_hi = 1000;
  std::size_t n_contexts = 200;
  std::size_t empirical_points = 20;  // log-spaced k values given the empirical check
  std::size_t normalization_histories = 1000;
  double expected_slope = -1.5;
  double expected_slope_tol = 0.15;

  // [lemmas]
  std::size_t lemalg_samples = 10000;
  std::uint64_t hj1_k_max = 50;
  std::uint64_t hj1_n_max = 500;
  std::uint64_t hj2_k_max = 10000;
};

/// Parses an INI file. Throws ConfigError on unknown sections or keys,
/// missing mandatory keys (the seed) and malformed values; model parameters
/// are validated by the model factories (DomainError).
ExperimentConfig load_config(const std::filesystem::path& path);

/// Parses INI text; `path` is only used in messages.
ExperimentConfig parse_config(const std::string& text, const std::string& path = "<string>");

/// "1, 2, 3", "1..20", "logspace(10, 1000, 25)" -> integers.
std::vector<std::uint64_t> parse_index_list(const std::string& text);
/// "0.5, 0.25", "power(c, s)", "geometric(c, r)", "constant(v)" with `length`
/// terms for the closed-form families.
std::vector<double> parse_real_sequence(const std::string& text, std::size_t length);

}  // namespace gmix
