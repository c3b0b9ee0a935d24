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

#include "gbscm/covariance_lab.hpp"
#include "gbscm/error.hpp"
#include "gbscm/param_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gbscm
{

namespace
{
// Fixed reduction blocks keep sums independent of the thread count.
constexpr std::size_t time_block = 512;
constexpr std::size_t draw_block = 256;

Eigen::Index side_dim(const SpatialMatrices &sp, Side side)
{
    return side == Side::receive ? sp.rx_elements() : sp.tx_elements();
}

void accumulate_outer(const Eigen::MatrixXcd &H, Side side, Eigen::MatrixXcd &acc)
{
    if (side == Side::receive)
        acc.noalias() += H * H.adjoint();
    else
        acc.noalias() += H.adjoint() * H;
}

// Runs `block_fn(first, last, partial)` over [0, n) in fixed blocks, in parallel,
// and sums the partials in block order.
template <typename BlockFn>
Eigen::MatrixXcd blocked_sum(std::size_t n, std::size_t block, Eigen::Index dim, BlockFn &&block_fn)
{
    const std::size_t n_blocks = (n + block - 1) / block;
    std::vector<Eigen::MatrixXcd> partial(n_blocks);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(n_blocks); ++b)
    {
        const std::size_t first = static_cast<std::size_t>(b) * block;
        const std::size_t last = std::min(n, first + block);
        partial[b] = Eigen::MatrixXcd::Zero(dim, dim);
        block_fn(first, last, partial[b]);
    }
    Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto &p : partial)
        total += p;
    return total;
}

void attach_error(CovarianceReport &report, const SpatialMatrices &sp)
{
    const auto theory = theoretical_covariance(sp, report.side);
    report.frobenius_error_vs_theoretical = frobenius_relative_error(report.matrix, theory.matrix);
}
} // namespace

std::string to_string(Side side)
{
    return side == Side::receive ? "receive" : "transmit";
}

DopplerGram doppler_gram(const SpatialMatrices &sp, double nu_tolerance, Side side)
{
    if (!(nu_tolerance >= 0.0))
        throw invalid_parameter("covariance_lab", "nu_tolerance must be >= 0");
    const Eigen::Index M = sp.subpaths();

    std::vector<int> order(M);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sp.nu(a) < sp.nu(b); });

    DopplerGram out;
    std::vector<int> group_of(M, 0);
    for (Eigen::Index i = 0; i < M; ++i)
    {
        const int m = order[i];
        if (i == 0 || sp.nu(m) - sp.nu(order[i - 1]) > nu_tolerance)
            out.equal_doppler_groups.emplace_back();
        out.equal_doppler_groups.back().push_back(m);
        group_of[m] = static_cast<int>(out.equal_doppler_groups.size()) - 1;
    }
    for (auto &g : out.equal_doppler_groups)
    {
        std::sort(g.begin(), g.end());
        if (g.size() > 1)
            out.diagonal = false;
    }

    const Eigen::MatrixXcd gram =
        side == Side::receive ? Eigen::MatrixXcd(sp.tx.transpose() * sp.tx.conjugate())
                              : Eigen::MatrixXcd(sp.rx.adjoint() * sp.rx);
    out.matrix = Eigen::MatrixXcd::Zero(M, M);
    for (Eigen::Index m = 0; m < M; ++m)
        for (Eigen::Index n = 0; n < M; ++n)
            if (group_of[m] == group_of[n])
                out.matrix(m, n) = gram(m, n);
    return out;
}

CovarianceReport theoretical_covariance(const SpatialMatrices &sp, Side side, double nu_tolerance)
{
    const DopplerGram D = doppler_gram(sp, nu_tolerance, side);
    const Eigen::VectorXd weights = sp.rho.cwiseAbs2().cwiseProduct(D.matrix.diagonal().real());
    const Eigen::MatrixXcd A = side == Side::receive ? Eigen::MatrixXcd(sp.rx) : Eigen::MatrixXcd(sp.tx.conjugate());

    CovarianceReport report;
    report.side = side;
    report.provenance.kind = Provenance::Kind::theoretical;
    report.matrix = A * weights.asDiagonal() * A.adjoint();
    return report;
}

CovarianceReport time_limit_covariance(const SpatialMatrices &sp, double f, Side side, double nu_tolerance)
{
    const DopplerGram D = doppler_gram(sp, nu_tolerance, side);
    const Eigen::VectorXcd u = time_invariant_weights(sp, f);
    const Eigen::MatrixXcd B = side == Side::receive ? Eigen::MatrixXcd(sp.rx * u.asDiagonal())
                                                     : Eigen::MatrixXcd(sp.tx.conjugate() * u.conjugate().asDiagonal());
    CovarianceReport report;
    report.side = side;
    report.provenance.kind = Provenance::Kind::time_limit;
    report.matrix = B * D.matrix * B.adjoint();
    attach_error(report, sp);
    return report;
}

CovarianceReport sample_covariance_time(const SpatialMatrices &sp, double f, const std::vector<double> &times,
                                        Side side)
{
    if (times.empty())
        throw invalid_parameter("covariance_lab", "time-sample covariance needs at least one time point");

    const Eigen::MatrixXcd B = sp.rx * time_invariant_weights(sp, f).asDiagonal();
    const Eigen::Index dim = side_dim(sp, side);
    const Eigen::MatrixXcd sum = blocked_sum(times.size(), time_block, dim, [&](std::size_t first, std::size_t last,
                                                                                 Eigen::MatrixXcd &acc) {
        Eigen::MatrixXcd scaled, H;
        for (std::size_t i = first; i < last; ++i)
        {
            scaled.noalias() = B * doppler_vector(sp, times[i]).asDiagonal();
            H.noalias() = scaled * sp.tx.transpose();
            accumulate_outer(H, side, acc);
        }
    });

    CovarianceReport report;
    report.side = side;
    report.provenance.kind = Provenance::Kind::time_sample;
    report.provenance.n_samples = times.size();
    report.matrix = sum / static_cast<double>(times.size());
    attach_error(report, sp);
    return report;
}

CovarianceReport sample_covariance_time(const SpatialMatrices &sp, double f, double t0, double dt,
                                        std::size_t n_samples, Side side)
{
    if (n_samples == 0)
        throw invalid_parameter("covariance_lab", "time-sample covariance needs at least one time point");
    std::vector<double> times(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i)
        times[i] = t0 + static_cast<double>(i) * dt;
    auto report = sample_covariance_time(sp, f, times, side);
    report.provenance.time_step = dt;
    return report;
}

CovarianceReport sample_covariance_ensemble(const SpatialMatrices &sp, double f, double t, std::size_t n_draws,
                                            std::uint64_t seed, Side side)
{
    if (n_draws == 0)
        throw invalid_parameter("covariance_lab", "ensemble covariance needs n_draws >= 1");

    const Eigen::VectorXcd fixed =
        sp.rho.cast<cplx>().cwiseProduct(doppler_vector(sp, t)).cwiseProduct(frequency_vector(sp, f));
    const Eigen::Index M = sp.subpaths();
    const Eigen::Index dim = side_dim(sp, side);
    const Eigen::MatrixXcd sum =
        blocked_sum(n_draws, draw_block, dim, [&](std::size_t first, std::size_t last, Eigen::MatrixXcd &acc) {
            std::vector<double> phases(M);
            Eigen::VectorXcd w(M);
            Eigen::MatrixXcd scaled, H;
            for (std::size_t i = first; i < last; ++i)
            {
                draw_phases(substream_seed(seed, i), phases);
                for (Eigen::Index m = 0; m < M; ++m)
                    w(m) = fixed(m) * std::polar(1.0, phases[m]);
                scaled.noalias() = sp.rx * w.asDiagonal();
                H.noalias() = scaled * sp.tx.transpose();
                accumulate_outer(H, side, acc);
            }
        });

    CovarianceReport report;
    report.side = side;
    report.provenance.kind = Provenance::Kind::ensemble_sample;
    report.provenance.n_draws = n_draws;
    report.matrix = sum / static_cast<double>(n_draws);
    attach_error(report, sp);
    return report;
}

CovarianceReport sample_covariance_ensemble(const LinkMultipath &link, const ArrayDescriptor &tx,
                                            const ArrayDescriptor &rx, double f, double t, std::size_t n_draws,
                                            std::uint64_t seed, Side side)
{
    return sample_covariance_ensemble(precompute_spatial(link, tx, rx), f, t, n_draws, seed, side);
}

double frobenius_relative_error(const Eigen::MatrixXcd &k, const Eigen::MatrixXcd &reference)
{
    const double ref = reference.norm();
    if (ref == 0.0)
        return (k - reference).norm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return (k - reference).norm() / ref;
}

std::vector<ConvergenceRow> convergence_experiment(const SpatialMatrices &sp, const ConvergenceConfig &cfg)
{
    if (cfg.horizons.empty() && cfg.n_draws.empty())
        throw invalid_parameter("covariance_lab", "convergence experiment needs horizons or n_draws");
    if (!(cfg.time_step > 0.0))
        throw invalid_parameter("covariance_lab", "convergence time_step must be > 0");

    const auto theory = theoretical_covariance(sp, cfg.side, cfg.nu_tolerance);
    std::vector<ConvergenceRow> rows;
    for (std::size_t n : cfg.horizons)
    {
        const auto k = sample_covariance_time(sp, cfg.f, 0.0, cfg.time_step, n, cfg.side);
        rows.push_back({"time", n, frobenius_relative_error(k.matrix, theory.matrix)});
    }
    for (std::size_t n : cfg.n_draws)
    {
        const auto k = sample_covariance_ensemble(sp, cfg.f, 0.0, n, cfg.seed, cfg.side);
        rows.push_back({"ensemble", n, frobenius_relative_error(k.matrix, theory.matrix)});
    }
    return rows;
}

std::optional<std::size_t> samples_to_reach(const std::vector<ConvergenceRow> &rows, const std::string &estimator,
                                            double threshold)
{
    std::vector<const ConvergenceRow *> sel;
    for (const auto &r : rows)
        if (r.estimator == estimator)
            sel.push_back(&r);
    std::sort(sel.begin(), sel.end(), [](auto *a, auto *b) { return a->budget < b->budget; });

    std::optional<std::size_t> found;
    for (auto it = sel.rbegin(); it != sel.rend(); ++it)
    {
        if ((*it)->error > threshold)
            break;
        found = (*it)->budget;
    }
    return found;
}

} // namespace gbscm
