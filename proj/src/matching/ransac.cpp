#include "lunareg/matching/ransac.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "lunareg/core/rng.hpp"

namespace lunareg {

namespace {

/// Iterations per adaptive-exit check. The exit test only runs on chunk
/// boundaries so a parallel evaluation of a chunk gives the same iteration
/// count as the sequential definition.
constexpr int kChunk = 64;
constexpr int kDrawsPerIter = 32;

struct Candidate {
    bool valid = false;
    int inliers = 0;
    double total_error = 0.0;
    int iteration = 0;
    Homography h;

    /// Selection order: most inliers, then lowest inlier error, then first
    /// iteration reaching that score.
    bool better_than(const Candidate& o) const {
        if (!o.valid)
            return valid;
        if (!valid)
            return false;
        if (inliers != o.inliers)
            return inliers > o.inliers;
        if (total_error != o.total_error)
            return total_error < o.total_error;
        return iteration < o.iteration;
    }
};

}  // namespace

int RansacResult::inlier_count() const {
    return static_cast<int>(std::count(inlier_mask.begin(), inlier_mask.end(), 1));
}

RansacResult ransac_homography(const MatchSet& matches, const RansacParams& params) {
    const int n = matches.size();
    if (n < 4)
        throw InsufficientMatches();
    if (params.threshold_px <= 0.0)
        throw ConfigInvalid("threshold_px", "must be positive");
    if (params.max_iters < 1)
        throw ConfigInvalid("max_iters", "must be >= 1");
    if (params.confidence <= 0.0 || params.confidence >= 1.0)
        throw ConfigInvalid("confidence", "must be in (0, 1)");

    std::vector<Eigen::Vector2d> pa(n), pb(n);
    for (int i = 0; i < n; ++i) {
        pa[i] = matches.point_a(i);
        pb[i] = matches.point_b(i);
    }

    // Canonical match order: sampling positions refer to this ordering, so a
    // permutation of the input list cannot change which pairs get drawn.
    std::vector<int> canon(n);
    std::iota(canon.begin(), canon.end(), 0);
    std::sort(canon.begin(), canon.end(), [&](int l, int r) {
        const double dl = matches.pairs[l].distance, dr = matches.pairs[r].distance;
        if (dl != dr)
            return dl < dr;
        const auto tl = std::make_tuple(pa[l].x(), pa[l].y(), pb[l].x(), pb[l].y());
        const auto tr = std::make_tuple(pa[r].x(), pa[r].y(), pb[r].x(), pb[r].y());
        return tl < tr;
    });
    std::vector<Eigen::Vector2d> ca(n), cb(n);
    for (int c = 0; c < n; ++c) {
        ca[c] = pa[canon[c]];
        cb[c] = pb[canon[c]];
    }

    CounterRng rng(params.seed);

    auto evaluate = [&](const Homography& h, std::vector<std::uint8_t>* mask, double* err_sum) {
        Homography inv;
        try {
            inv = h.inverse();
        } catch (const NonInvertibleHomography&) {
            return -1;
        }
        int count = 0;
        double total = 0.0;
        for (int c = 0; c < n; ++c) {
            double e;
            try {
                e = symmetric_transfer_error(h, inv, ca[c], cb[c]);
            } catch (const NonInvertibleHomography&) {
                continue;  // point mapped to infinity
            }
            const bool in = e < params.threshold_px;
            if (mask)
                (*mask)[c] = in ? 1 : 0;
            if (in) {
                ++count;
                total += e;
            }
        }
        if (err_sum)
            *err_sum = total;
        return count;
    };

    Candidate best;
    int iterations = 0;
    while (iterations < params.max_iters) {
        const int chunk_end = std::min(params.max_iters, iterations + kChunk);
        for (int t = iterations; t < chunk_end; ++t) {
            // Draw 4 distinct canonical positions by rejection; each draw is a
            // pure function of (seed, iteration, attempt).
            std::array<int, 4> pick{};
            int found = 0;
            for (int attempt = 0; attempt < kDrawsPerIter && found < 4; ++attempt) {
                const int idx = static_cast<int>(
                    rng.at(static_cast<std::uint64_t>(t) * kDrawsPerIter + attempt) %
                    static_cast<std::uint64_t>(n));
                bool dup = false;
                for (int k = 0; k < found; ++k)
                    dup |= pick[k] == idx;
                if (!dup)
                    pick[found++] = idx;
            }
            if (found < 4)
                continue;

            Homography model;
            try {
                model = dlt_homography({ca[pick[0]], ca[pick[1]], ca[pick[2]], ca[pick[3]]},
                                       {cb[pick[0]], cb[pick[1]], cb[pick[2]], cb[pick[3]]});
            } catch (const Error&) {
                continue;  // degenerate sample
            }

            double total = 0.0;
            const int count = evaluate(model, nullptr, &total);
            if (count < 4)
                continue;
            Candidate cand{true, count, total, t, model};
            if (cand.better_than(best))
                best = cand;
        }
        iterations = chunk_end;

        if (best.valid) {
            const double w = static_cast<double>(best.inliers) / n;
            const double p_all_inlier_samples = std::pow(std::pow(w, 4), iterations);
            if (1.0 - p_all_inlier_samples < 1.0 - params.confidence)
                break;
        }
    }

    if (!best.valid)
        throw NoModelFound();

    // Refit on the best model's inlier set, then rebuild the mask once against
    // the refitted transform so every reported inlier satisfies the threshold.
    std::vector<std::uint8_t> mask(n, 0);
    evaluate(best.h, &mask, nullptr);
    std::vector<Eigen::Vector2d> ia, ib;
    for (int c = 0; c < n; ++c) {
        if (mask[c]) {
            ia.push_back(ca[c]);
            ib.push_back(cb[c]);
        }
    }
    Homography final_h = best.h;
    if (static_cast<int>(ia.size()) >= 4) {
        try {
            Homography refit = dlt_homography(ia, ib);
            std::vector<std::uint8_t> refit_mask(n, 0);
            if (evaluate(refit, &refit_mask, nullptr) >= 4) {
                final_h = refit;
                mask = std::move(refit_mask);
            }
        } catch (const Error&) {
            // keep the minimal-sample model
        }
    }

    RansacResult result;
    result.h = final_h;
    result.iterations_used = iterations;
    result.inlier_mask.assign(n, 0);
    for (int c = 0; c < n; ++c)
        result.inlier_mask[canon[c]] = mask[c];
    return result;
}

}  // namespace lunareg
