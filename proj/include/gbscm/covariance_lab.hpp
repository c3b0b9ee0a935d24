// SPDX-License-Identifier: Apache-2.0
//
// gbscm - matrix-form geometry-based stochastic MIMO channel simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "gbscm/coeff_engine.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gbscm
{

// Which array's response sandwiches the covariance.
//   receive:  K_R = E[H H^H], R x R, built as R (...) R^H
//   transmit: K_S = E[H^H H], S x S, built as S^* (...) S^T
enum class Side
{
    receive,
    transmit
};

std::string to_string(Side side);

struct Provenance
{
    enum class Kind
    {
        theoretical,     // time and phase-ensemble expectation
        time_limit,      // infinite-horizon time average for the link's own phases
        time_sample,     // average over successive channel samples
        ensemble_sample  // average over redrawn phases at a fixed (f, t)
    };
    Kind kind = Kind::theoretical;
    std::size_t n_samples = 0; // time_sample
    double time_step = 0.0;    // time_sample, 0 if irregular
    std::size_t n_draws = 0;   // ensemble_sample
};

struct CovarianceReport
{
    Eigen::MatrixXcd matrix;
    Side side = Side::receive;
    Provenance provenance;
    std::optional<double> frobenius_error_vs_theoretical;
};

// Time average of the inner Gram matrix,
//   receive:  D = E_t[V(t) S^T S^* V^H(t)]
//   transmit: D = E_t[V^H(t) R^H R V(t)]
// Entries (m, m') survive only when subpaths m and m' fall in the same
// equal-Doppler group (consecutive sorted nu within nu_tolerance).
struct DopplerGram
{
    Eigen::MatrixXcd matrix; // M x M
    std::vector<std::vector<int>> equal_doppler_groups;
    bool diagonal = true; // every group is a singleton
};

inline constexpr double default_nu_tolerance = 1e-12; // m/s

DopplerGram doppler_gram(const SpatialMatrices &sp, double nu_tolerance = default_nu_tolerance,
                         Side side = Side::receive);

// K_R = R diag(rho) diag(D) diag(rho) R^H (mirror for transmit). Equals the
// time average whenever the Doppler coefficients are distinct. Off-diagonal
// entries of D from equal-Doppler groups carry the link's initial phases and
// vanish in expectation over them, so they are not part of this matrix; see
// time_limit_covariance for the phase-conditional value.
CovarianceReport theoretical_covariance(const SpatialMatrices &sp, Side side = Side::receive,
                                        double nu_tolerance = default_nu_tolerance);

// Infinite-horizon time average for the link as drawn, using the full D
// (including equal-Doppler blocks): R U(f) D U^H(f) R^H. Depends on f only
// through equal-Doppler groups.
CovarianceReport time_limit_covariance(const SpatialMatrices &sp, double f, Side side = Side::receive,
                                       double nu_tolerance = default_nu_tolerance);

// (1/T) sum_t H H^H (receive) or H^H H (transmit) at frequency f.
CovarianceReport sample_covariance_time(const SpatialMatrices &sp, double f, const std::vector<double> &times,
                                        Side side = Side::receive);

// Uniform grid t_i = t0 + i dt, i < n_samples.
CovarianceReport sample_covariance_time(const SpatialMatrices &sp, double f, double t0, double dt,
                                        std::size_t n_samples, Side side = Side::receive);

// Average over n_draws phase redraws at fixed (f, t). Draw i uses the phases
// of redraw_phases(link, substream_seed(seed, i)).
CovarianceReport sample_covariance_ensemble(const LinkMultipath &link, const ArrayDescriptor &tx,
                                            const ArrayDescriptor &rx, double f, double t, std::size_t n_draws,
                                            std::uint64_t seed, Side side = Side::receive);
CovarianceReport sample_covariance_ensemble(const SpatialMatrices &sp, double f, double t, std::size_t n_draws,
                                            std::uint64_t seed, Side side = Side::receive);

// ||K - K_ref||_F / ||K_ref||_F
double frobenius_relative_error(const Eigen::MatrixXcd &k, const Eigen::MatrixXcd &reference);

struct ConvergenceConfig
{
    double f = 0.0;                     // absolute frequency, Hz
    double time_step = 10e-3 / 140;     // one OFDM symbol of a 10 ms LTE frame
    std::vector<std::size_t> horizons;  // time-estimator sample counts
    std::vector<std::size_t> n_draws;   // ensemble-estimator draw counts
    std::uint64_t seed = 1;
    Side side = Side::receive;
    double nu_tolerance = default_nu_tolerance;
};

struct ConvergenceRow
{
    std::string estimator; // "time" or "ensemble"
    std::size_t budget = 0; // channel samples consumed
    double error = 0.0;     // Frobenius error vs theoretical
};

// Error of both estimators against the theoretical covariance for matched sample budgets.
std::vector<ConvergenceRow> convergence_experiment(const SpatialMatrices &sp, const ConvergenceConfig &cfg);

// Smallest budget from which every listed budget of `estimator` has error <= threshold.
std::optional<std::size_t> samples_to_reach(const std::vector<ConvergenceRow> &rows, const std::string &estimator,
                                            double threshold);

} // namespace gbscm
