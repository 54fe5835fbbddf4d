#pragma once

// Exhaustive split search written from the gain formula: every feature, every midpoint
// between consecutive distinct values. Gains within 1e-10 relative count as ties and the
// earlier candidate (lower feature, then lower threshold) is kept.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace oracle {

struct Split {
    std::size_t feature;
    double threshold;
    double gain;
};

struct SplitParams {
    double alpha = 0.0;
    double lambda = 1.0;
    double gamma = 0.0;
    double min_child_weight = 1.0;
};

inline double score(double g, double h, const SplitParams& p) {
    const double t = g > p.alpha ? g - p.alpha : (g < -p.alpha ? g + p.alpha : 0.0);
    return t * t / (h + p.lambda);
}

// columns[f][i] is feature f of instance i.
inline std::optional<Split> best_split(const std::vector<std::vector<double>>& columns, const std::vector<double>& g,
                                       const std::vector<double>& h, const SplitParams& p) {
    double G = 0, H = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        G += g[i];
        H += h[i];
    }
    std::optional<Split> best;
    for (std::size_t f = 0; f < columns.size(); ++f) {
        std::vector<double> values = columns[f];
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
            const double thr = values[k] + (values[k + 1] - values[k]) / 2;
            double gl = 0, hl = 0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (columns[f][i] < thr) {
                    gl += g[i];
                    hl += h[i];
                }
            }
            const double gr = G - gl, hr = H - hl;
            if (hl < p.min_child_weight || hr < p.min_child_weight) continue;
            const double gain = 0.5 * (score(gl, hl, p) + score(gr, hr, p) - score(G, H, p)) - p.gamma;
            if (gain <= 0) continue;
            if (!best || gain > best->gain + 1e-10 * std::abs(best->gain)) best = Split{f, thr, gain};
        }
    }
    return best;
}

}  // namespace oracle
