#pragma once

// Reference solver for the ranking-SVM dual, deliberately implemented with a
// different algorithm (long-horizon projected gradient descent) so the
// production coordinate-descent solver can be checked against it.

#include "motrank/pairwise.hpp"
#include "motrank/svm.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace motrank::testing {

struct ReferenceSolution {
    std::vector<double> alpha;
    double dual_objective = 0.0;
};

/// Minimizes f(a) = 1/2 a^T Q a - sum(a) over the box [0, C]^n by projected
/// gradient with a Lipschitz step, where Q_ij = z_i z_j K(d_i, d_j). Dense
/// and slow; intended for problems with at most a few dozen datapoints.
inline ReferenceSolution reference_dual_solve(const PairwiseDataset& pds, Kernel kernel,
                                              const TrainConfig& cfg, int max_steps = 200000,
                                              double stop_violation = 1e-9) {
    const std::size_t n = pds.pairs.size();
    std::vector<std::vector<double>> q(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto& di = pds.pairs[i].diff;
            const auto& dj = pds.pairs[j].diff;
            double k = 0.0;
            if (kernel == Kernel::linear) {
                for (std::size_t f = 0; f < di.size(); ++f) k += di[f] * dj[f];
            } else {
                double dist2 = 0.0;
                for (std::size_t f = 0; f < di.size(); ++f) {
                    const double d = di[f] - dj[f];
                    dist2 += d * d;
                }
                k = std::exp(-cfg.gamma * dist2);
            }
            q[i][j] = pds.pairs[i].label * pds.pairs[j].label * k;
        }
    }

    double lipschitz = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += std::abs(q[i][j]);
        lipschitz = std::max(lipschitz, row);
    }
    const double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

    std::vector<double> alpha(n, 0.0), grad(n);
    for (int it = 0; it < max_steps; ++it) {
        double violation = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double g = -1.0;
            for (std::size_t j = 0; j < n; ++j) g += q[i][j] * alpha[j];
            grad[i] = g;
            double pg = g;
            if (alpha[i] <= 0.0) pg = std::min(g, 0.0);
            else if (alpha[i] >= cfg.c) pg = std::max(g, 0.0);
            violation = std::max(violation, std::abs(pg));
        }
        if (violation <= stop_violation) break;
        for (std::size_t i = 0; i < n; ++i)
            alpha[i] = std::clamp(alpha[i] - step * grad[i], 0.0, cfg.c);
    }

    ReferenceSolution sol;
    sol.alpha = alpha;
    double quad = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        lin += alpha[i];
        for (std::size_t j = 0; j < n; ++j) quad += alpha[i] * q[i][j] * alpha[j];
    }
    sol.dual_objective = lin - 0.5 * quad;
    return sol;
}

/// Literal brute-force pairwise transform: walks every ordered pair and
/// applies the threshold rule directly. Used as the oracle for the
/// production transform.
struct BrutePair {
    std::size_t hi = 0;
    std::size_t lo = 0;
    int label = 0;
    std::vector<double> diff;
};

inline std::vector<BrutePair> brute_force_transform(const std::vector<std::vector<double>>& x,
                                                    const std::vector<double>& y, double pt) {
    auto clear = [pt](double hi, double lo) {
        if (lo <= 0.0) return hi > lo;
        return hi - lo > pt * lo;
    };
    std::vector<BrutePair> out;
    for (std::size_t a = 0; a < x.size(); ++a) {
        for (std::size_t b = 0; b < x.size(); ++b) {
            if (a == b) continue;
            if (!(y[a] > y[b]) || !clear(y[a], y[b])) continue;
            // a is clearly preferred over b: contribute both signed rows.
            BrutePair fwd;
            fwd.hi = a;
            fwd.lo = b;
            fwd.label = 1;
            fwd.diff.resize(x[a].size());
            for (std::size_t f = 0; f < x[a].size(); ++f) fwd.diff[f] = x[a][f] - x[b][f];
            BrutePair rev;
            rev.hi = a;
            rev.lo = b;
            rev.label = -1;
            rev.diff.resize(x[a].size());
            for (std::size_t f = 0; f < x[a].size(); ++f) rev.diff[f] = x[b][f] - x[a][f];
            out.push_back(std::move(fwd));
            out.push_back(std::move(rev));
        }
    }
    return out;
}

} // namespace motrank::testing
