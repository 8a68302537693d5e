#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "mobs/bayes_factors.hpp"
#include "mobs/gibbs.hpp"
#include "mobs/types.hpp"

namespace mobs {

struct ScreenOptions {
    double tol = 1e-8;      // fixed-point max-norm tolerance
    int max_iter = 200;     // fixed-point iteration cap
    int threads = 1;
    Eigen::Index chunk_size = 1024;  // predictors per work/spill chunk

    // Cache bytes held in memory before spilling chunks to disk.
    std::uint64_t mem_budget = std::uint64_t(1) << 31;

    // Directory for spill files; empty means the system temp directory.
    std::filesystem::path spill_dir;
};

void validate(const ScreenOptions& opts);

// Precomputed (log BF11, log BF12) pairs for every (predictor, draw) pair.
// Predictors are processed in fixed chunks of `chunk_size`; results are kept
// in one flat in-memory block when p * S * 16 bytes fit in mem_budget and
// are otherwise streamed to a spill file, one record per chunk.  Either way
// the values are bitwise identical: every (j, s) entry is a pure function of
// the inputs and chunk boundaries do not depend on the worker count.
class BfCache {
public:
    BfCache(BfCache&&) noexcept;
    BfCache& operator=(BfCache&&) noexcept;
    BfCache(const BfCache&) = delete;
    BfCache& operator=(const BfCache&) = delete;
    ~BfCache();  // removes the spill file, if any

    Eigen::Index num_predictors() const { return p_; }
    Eigen::Index num_draws() const { return draws_; }
    Eigen::Index chunk_size() const { return chunk_size_; }
    Eigen::Index num_chunks() const;
    bool spilled() const { return !spill_path_.empty(); }
    const std::filesystem::path& spill_path() const { return spill_path_; }

    // Per-predictor degeneracy flags (constant column, empty level, or any
    // missing code).  Degenerate predictors carry zeroed cache entries and
    // are skipped by every consumer.
    const std::vector<std::uint8_t>& degenerate() const { return degenerate_; }

    // Retained draws whose smallest variance fell below 1e-8 * var(y); such
    // draws still participate, the count is surfaced as a warning.
    long small_variance_draws() const { return small_variance_draws_; }

    // Visits chunks in ascending index order.  `pairs` holds j_count * S
    // (log_bf11, log_bf12) pairs, predictor-major, draw-minor.
    using ChunkFn = std::function<void(Eigen::Index chunk_index, Eigen::Index j_begin,
                                       Eigen::Index j_count, const double* pairs)>;
    void for_each_chunk(const ChunkFn& fn) const;

    // Single-entry access (reads through the spill file when present);
    // intended for inspection and tests, not hot loops.
    std::pair<double, double> entry(Eigen::Index j, Eigen::Index s) const;

private:
    friend BfCache compute_bf_cache(const Dataset&, const ChainOutput&,
                                    const Hyperparams&, const ScreenOptions&);
    BfCache() = default;

    Eigen::Index p_ = 0;
    Eigen::Index draws_ = 0;
    Eigen::Index chunk_size_ = 1;
    std::vector<double> data_;  // in-memory mode
    std::filesystem::path spill_path_;
    std::vector<std::uint8_t> degenerate_;
    long small_variance_draws_ = 0;
};

// Evaluates both Bayes factors for every predictor under every retained
// draw.  Throws NumericFailure naming (predictor, draw) if an entry is
// non-finite.
BfCache compute_bf_cache(const Dataset& data, const ChainOutput& chain,
                         const Hyperparams& hp, const ScreenOptions& opts = {});

struct KappaFit {
    Eigen::Vector4d kappa;
    int iterations = 0;
    bool converged = false;
};

// Empirical-Bayes fixed point: alternate (a) per-predictor hypothesis
// probabilities averaged over draws under the current kappa with (b) kappa
// reset to the across-predictor mean, until the max-norm change drops below
// tol.  Degenerate predictors are excluded from the average.  The update is
// a mean of simplex points, so kappa stays a simplex without renormalizing.
KappaFit kappa_fixed_point(const BfCache& cache, const Eigen::Vector4d& kappa0,
                           double tol, int max_iter, int threads = 1);

struct ScreeningResult {
    std::vector<HypothesisProbs> probs;    // size p; degenerate rows are (1,0,0,0)
    std::vector<std::uint8_t> degenerate;  // size p
    Eigen::Vector4d kappa;                 // fitted hypothesis mass
    int iterations = 0;                    // fixed-point iterations used
    bool converged = false;
    long small_variance_draws = 0;

    // Null-hypothesis probabilities as a dense vector (the screening
    // statistic; small means "keep").
    Eigen::VectorXd pi0() const;
};

// End-to-end stage two: cache, fixed point, final per-predictor averages.
ScreeningResult screen(const Dataset& data, const ChainOutput& chain,
                       const Hyperparams& hp, const ScreenOptions& opts = {});

// Indices (0-based, ascending) of the d_n smallest scores, extended to all
// entries tied with the d_n-th smallest.  Requires 1 <= d_n <= scores.size().
std::vector<Eigen::Index> select_top(const Eigen::Ref<const Eigen::VectorXd>& scores,
                                     Eigen::Index d_n);

}  // namespace mobs
