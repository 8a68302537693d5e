#include "mobs/screening.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "mobs/errors.hpp"
#include "mobs/math.hpp"
#include "mobs/parallel.hpp"

namespace mobs {

namespace {

constexpr char kSpillMagic[4] = {'M', 'B', 'S', 'C'};
constexpr std::uint32_t kSpillVersion = 1;
constexpr std::size_t kSpillHeaderBytes = 32;

struct SpillHeader {
    char magic[4];
    std::uint32_t version;
    std::uint64_t chunk_start;
    std::uint64_t chunk_len;
    std::uint64_t draws;
};
static_assert(sizeof(SpillHeader) == kSpillHeaderBytes);

std::filesystem::path make_spill_path(const std::filesystem::path& dir) {
    static std::atomic<unsigned long> counter{0};
    const auto base = dir.empty() ? std::filesystem::temp_directory_path() : dir;
    char name[64];
    std::snprintf(name, sizeof name, "mobs-spill-%ld-%lu.bin",
                  static_cast<long>(::getpid()), counter.fetch_add(1));
    return base / name;
}

void log_kappa_of(const Eigen::Vector4d& kappa, double* lk) {
    for (int i = 0; i < 4; ++i)
        lk[i] = kappa[i] > 0.0 ? std::log(kappa[i])
                               : -std::numeric_limits<double>::infinity();
}

}  // namespace

void validate(const ScreenOptions& opts) {
    if (!(opts.tol > 0.0) || !std::isfinite(opts.tol))
        throw InvalidArgument("screen options: tol must be positive");
    if (opts.max_iter < 1) throw InvalidArgument("screen options: max_iter must be >= 1");
    if (opts.threads < 1) throw InvalidArgument("screen options: threads must be >= 1");
    if (opts.chunk_size < 1)
        throw InvalidArgument("screen options: chunk_size must be >= 1");
    if (opts.mem_budget < 1)
        throw InvalidArgument("screen options: mem_budget must be >= 1");
}

BfCache::BfCache(BfCache&& other) noexcept { *this = std::move(other); }

BfCache& BfCache::operator=(BfCache&& other) noexcept {
    if (this != &other) {
        if (!spill_path_.empty()) {
            std::error_code ec;
            std::filesystem::remove(spill_path_, ec);
        }
        p_ = other.p_;
        draws_ = other.draws_;
        chunk_size_ = other.chunk_size_;
        data_ = std::move(other.data_);
        spill_path_ = std::move(other.spill_path_);
        other.spill_path_.clear();
        degenerate_ = std::move(other.degenerate_);
        small_variance_draws_ = other.small_variance_draws_;
    }
    return *this;
}

BfCache::~BfCache() {
    if (!spill_path_.empty()) {
        std::error_code ec;
        std::filesystem::remove(spill_path_, ec);
    }
}

Eigen::Index BfCache::num_chunks() const {
    return p_ == 0 ? 0 : (p_ + chunk_size_ - 1) / chunk_size_;
}

void BfCache::for_each_chunk(const ChunkFn& fn) const {
    const Eigen::Index chunks = num_chunks();
    if (spill_path_.empty()) {
        for (Eigen::Index c = 0; c < chunks; ++c) {
            const Eigen::Index begin = c * chunk_size_;
            const Eigen::Index len = std::min(chunk_size_, p_ - begin);
            fn(c, begin, len, data_.data() + static_cast<std::size_t>(begin) * draws_ * 2);
        }
        return;
    }
    std::ifstream in(spill_path_, std::ios::binary);
    if (!in) throw IoFailure("cannot open spill file " + spill_path_.string());
    std::vector<double> buffer;
    for (Eigen::Index c = 0; c < chunks; ++c) {
        SpillHeader header{};
        in.read(reinterpret_cast<char*>(&header), sizeof header);
        if (!in || std::memcmp(header.magic, kSpillMagic, 4) != 0 ||
            header.version != kSpillVersion)
            throw IoFailure("corrupt spill record in " + spill_path_.string());
        const auto len = static_cast<Eigen::Index>(header.chunk_len);
        buffer.resize(static_cast<std::size_t>(len) * draws_ * 2);
        in.read(reinterpret_cast<char*>(buffer.data()),
                static_cast<std::streamsize>(buffer.size() * sizeof(double)));
        if (!in) throw IoFailure("truncated spill file " + spill_path_.string());
        fn(c, static_cast<Eigen::Index>(header.chunk_start), len, buffer.data());
    }
}

std::pair<double, double> BfCache::entry(Eigen::Index j, Eigen::Index s) const {
    if (j < 0 || j >= p_ || s < 0 || s >= draws_)
        throw InvalidArgument("bf cache: entry index out of range");
    if (spill_path_.empty()) {
        const auto at = (static_cast<std::size_t>(j) * draws_ + s) * 2;
        return {data_[at], data_[at + 1]};
    }
    const Eigen::Index c = j / chunk_size_;
    const std::uint64_t payload = static_cast<std::uint64_t>(chunk_size_) * draws_ * 16;
    const std::uint64_t offset = static_cast<std::uint64_t>(c) * (kSpillHeaderBytes + payload) +
                                 kSpillHeaderBytes +
                                 static_cast<std::uint64_t>(j - c * chunk_size_) * draws_ * 16 +
                                 static_cast<std::uint64_t>(s) * 16;
    std::ifstream in(spill_path_, std::ios::binary);
    if (!in) throw IoFailure("cannot open spill file " + spill_path_.string());
    in.seekg(static_cast<std::streamoff>(offset));
    double pair[2];
    in.read(reinterpret_cast<char*>(pair), sizeof pair);
    if (!in) throw IoFailure("truncated spill file " + spill_path_.string());
    return {pair[0], pair[1]};
}

BfCache compute_bf_cache(const Dataset& data, const ChainOutput& chain,
                         const Hyperparams& hp, const ScreenOptions& opts) {
    validate(data);
    validate(hp);
    validate(opts);
    if (chain.draws.empty()) throw InvalidArgument("bf cache: no retained draws");
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    const auto S = static_cast<Eigen::Index>(chain.draws.size());
    for (const MixtureDraw& draw : chain.draws) {
        validate(draw);
        if (draw.weights.size() != hp.k)
            throw InvalidArgument("bf cache: draw component count differs from k");
        if (draw.allocations.size() != n)
            throw InvalidArgument("bf cache: draw allocation length differs from n");
    }

    BfCache cache;
    cache.p_ = p;
    cache.draws_ = S;
    cache.chunk_size_ = std::min(opts.chunk_size, std::max<Eigen::Index>(p, 1));

    // Draws whose smallest variance collapsed relative to the data scale.
    double var_y = 0.0;
    {
        const double m = data.y.mean();
        var_y = (data.y.array() - m).square().sum() / static_cast<double>(n);
    }
    for (const MixtureDraw& draw : chain.draws)
        if (draw.variances.minCoeff() < 1e-8 * var_y) ++cache.small_variance_draws_;

    // A predictor is degenerate if it cannot support the comparison: any
    // missing code, a constant column, or an observed-level gap.
    cache.degenerate_.assign(static_cast<std::size_t>(p), 0);
    for (Eigen::Index j = 0; j < p; ++j) {
        const int d = data.levels[j];
        Eigen::VectorXi occupancy = Eigen::VectorXi::Zero(d);
        bool missing = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            const std::uint8_t code = data.x(i, j);
            if (code == kMissingCode) {
                missing = true;
                break;
            }
            occupancy[code] += 1;
        }
        if (missing || occupancy.minCoeff() == 0 || occupancy.maxCoeff() == n)
            cache.degenerate_[static_cast<std::size_t>(j)] = 1;
    }

    // Per-draw constants (floored weights, beta normalizer, inverse-gamma
    // prior parameters and their log-gammas) prepared once and shared by
    // every predictor; the per-pair work then depends only on the counts.
    std::vector<detail::DrawBfTerms> draw_terms;
    draw_terms.reserve(static_cast<std::size_t>(S));
    for (const MixtureDraw& draw : chain.draws)
        draw_terms.push_back(detail::make_draw_bf_terms(draw, hp));

    const std::uint64_t needed = static_cast<std::uint64_t>(p) * S * 2 * sizeof(double);
    const bool spill = needed > opts.mem_budget;
    std::ofstream spill_out;
    std::vector<double> chunk_buffer;
    if (spill) {
        cache.spill_path_ = make_spill_path(opts.spill_dir);
        spill_out.open(cache.spill_path_, std::ios::binary | std::ios::trunc);
        if (!spill_out)
            throw IoFailure("cannot create spill file " + cache.spill_path_.string());
        chunk_buffer.resize(static_cast<std::size_t>(cache.chunk_size_) * S * 2);
    } else {
        cache.data_.resize(static_cast<std::size_t>(p) * S * 2);
    }

    const Eigen::Index chunks = cache.num_chunks();
    for (Eigen::Index c = 0; c < chunks; ++c) {
        const Eigen::Index begin = c * cache.chunk_size_;
        const Eigen::Index len = std::min(cache.chunk_size_, p - begin);
        double* chunk_dest = spill
            ? chunk_buffer.data()
            : cache.data_.data() + static_cast<std::size_t>(begin) * S * 2;
        parallel_for(len, opts.threads, [&](Eigen::Index v) {
            const Eigen::Index j = begin + v;
            double* dest = chunk_dest + static_cast<std::size_t>(v) * S * 2;
            if (cache.degenerate_[static_cast<std::size_t>(j)]) {
                std::fill(dest, dest + S * 2, 0.0);
                return;
            }
            const int d = data.levels[j];
            LevelSuffStats stats;  // buffers reused across draws
            for (Eigen::Index s = 0; s < S; ++s) {
                const MixtureDraw& draw = chain.draws[static_cast<std::size_t>(s)];
                detail::accumulate_suff_stats_into(stats, data.y, data.x.col(j),
                                                   draw.allocations, hp.k, d);
                const auto& terms = draw_terms[static_cast<std::size_t>(s)];
                const double b11 = detail::log_bf11_with(stats, terms.bf11);
                const double b12 = detail::log_bf12_with(stats, terms.bf12);
                if (!std::isfinite(b11) || !std::isfinite(b12))
                    throw NumericFailure("bf cache: non-finite Bayes factor at predictor " +
                                         std::to_string(j + 1) + ", draw " +
                                         std::to_string(s + 1));
                dest[2 * s] = b11;
                dest[2 * s + 1] = b12;
            }
        });
        if (spill) {
            SpillHeader header{};
            std::memcpy(header.magic, kSpillMagic, 4);
            header.version = kSpillVersion;
            header.chunk_start = static_cast<std::uint64_t>(begin);
            header.chunk_len = static_cast<std::uint64_t>(len);
            header.draws = static_cast<std::uint64_t>(S);
            spill_out.write(reinterpret_cast<const char*>(&header), sizeof header);
            spill_out.write(reinterpret_cast<const char*>(chunk_buffer.data()),
                            static_cast<std::streamsize>(
                                static_cast<std::size_t>(len) * S * 2 * sizeof(double)));
            if (!spill_out)
                throw IoFailure("cannot write spill file " + cache.spill_path_.string());
        }
    }
    if (spill) {
        spill_out.close();
        if (!spill_out)
            throw IoFailure("cannot finish spill file " + cache.spill_path_.string());
    }
    return cache;
}

KappaFit kappa_fixed_point(const BfCache& cache, const Eigen::Vector4d& kappa0,
                           double tol, int max_iter, int threads) {
    for (int i = 0; i < 4; ++i)
        if (!(kappa0[i] >= 0.0) || !std::isfinite(kappa0[i]))
            throw InvalidArgument("kappa fixed point: invalid starting kappa");
    if (std::abs(kappa0.sum() - 1.0) > 1e-8)
        throw InvalidArgument("kappa fixed point: starting kappa must sum to 1");
    if (!(tol > 0.0)) throw InvalidArgument("kappa fixed point: tol must be positive");
    if (max_iter < 1) throw InvalidArgument("kappa fixed point: max_iter must be >= 1");
    if (threads < 1) throw InvalidArgument("kappa fixed point: threads must be >= 1");

    const auto& degenerate = cache.degenerate();
    const Eigen::Index S = cache.num_draws();
    long active = 0;
    for (std::uint8_t flag : degenerate)
        if (!flag) ++active;

    KappaFit fit{kappa0, 0, false};
    if (active == 0 || cache.num_predictors() == 0) {
        fit.converged = true;
        return fit;
    }

    // Per-predictor averages land in fixed slots; the cross-predictor sum
    // runs in index order regardless of thread count, so the fixed point is
    // reproducible bit-for-bit for any `threads`.
    std::vector<Eigen::Array4d> slots(static_cast<std::size_t>(cache.chunk_size()));
    for (int iter = 1; iter <= max_iter; ++iter) {
        double lk[4];
        log_kappa_of(fit.kappa, lk);
        Eigen::Array4d total = Eigen::Array4d::Zero();
        cache.for_each_chunk([&](Eigen::Index, Eigen::Index j_begin, Eigen::Index j_count,
                                 const double* pairs) {
            parallel_for(j_count, threads, [&](Eigen::Index v) {
                if (degenerate[static_cast<std::size_t>(j_begin + v)]) return;
                const double* row = pairs + static_cast<std::size_t>(v) * S * 2;
                Eigen::Array4d acc = Eigen::Array4d::Zero();
                double out[4];
                for (Eigen::Index s = 0; s < S; ++s) {
                    detail::posterior_probs4(lk, row[2 * s], row[2 * s + 1], out);
                    acc[0] += out[0];
                    acc[1] += out[1];
                    acc[2] += out[2];
                    acc[3] += out[3];
                }
                slots[static_cast<std::size_t>(v)] = acc / static_cast<double>(S);
            });
            for (Eigen::Index v = 0; v < j_count; ++v)
                if (!degenerate[static_cast<std::size_t>(j_begin + v)])
                    total += slots[static_cast<std::size_t>(v)];
        });
        const Eigen::Vector4d next = (total / static_cast<double>(active)).matrix();
        const double delta = (next - fit.kappa).cwiseAbs().maxCoeff();
        fit.kappa = next;
        fit.iterations = iter;
        if (delta < tol) {
            fit.converged = true;
            break;
        }
    }
    return fit;
}

Eigen::VectorXd ScreeningResult::pi0() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(probs.size()));
    for (Eigen::Index j = 0; j < out.size(); ++j)
        out[j] = probs[static_cast<std::size_t>(j)].p0;
    return out;
}

ScreeningResult screen(const Dataset& data, const ChainOutput& chain,
                       const Hyperparams& hp, const ScreenOptions& opts) {
    const BfCache cache = compute_bf_cache(data, chain, hp, opts);
    const KappaFit fit =
        kappa_fixed_point(cache, hp.kappa, opts.tol, opts.max_iter, opts.threads);

    ScreeningResult result;
    result.probs.assign(static_cast<std::size_t>(cache.num_predictors()), HypothesisProbs{});
    result.degenerate = cache.degenerate();
    result.kappa = fit.kappa;
    result.iterations = fit.iterations;
    result.converged = fit.converged;
    result.small_variance_draws = cache.small_variance_draws();

    const Eigen::Index S = cache.num_draws();
    double lk[4];
    log_kappa_of(fit.kappa, lk);
    cache.for_each_chunk([&](Eigen::Index, Eigen::Index j_begin, Eigen::Index j_count,
                             const double* pairs) {
        parallel_for(j_count, opts.threads, [&](Eigen::Index v) {
            const auto j = static_cast<std::size_t>(j_begin + v);
            if (result.degenerate[j]) return;  // stays (1, 0, 0, 0)
            const double* row = pairs + static_cast<std::size_t>(v) * S * 2;
            double acc[4] = {0.0, 0.0, 0.0, 0.0};
            double out[4];
            for (Eigen::Index s = 0; s < S; ++s) {
                detail::posterior_probs4(lk, row[2 * s], row[2 * s + 1], out);
                for (int i = 0; i < 4; ++i) acc[i] += out[i];
            }
            result.probs[j].p0 = acc[0] / static_cast<double>(S);
            result.probs[j].p11 = acc[1] / static_cast<double>(S);
            result.probs[j].p12 = acc[2] / static_cast<double>(S);
            result.probs[j].p13 = acc[3] / static_cast<double>(S);
        });
    });
    return result;
}

std::vector<Eigen::Index> select_top(const Eigen::Ref<const Eigen::VectorXd>& scores,
                                     Eigen::Index d_n) {
    const Eigen::Index p = scores.size();
    if (d_n < 1 || d_n > p)
        throw InvalidArgument("select_top: d_n must lie in 1..p");
    if (!scores.allFinite()) throw InvalidArgument("select_top: non-finite scores");
    std::vector<double> sorted(scores.data(), scores.data() + p);
    std::nth_element(sorted.begin(), sorted.begin() + (d_n - 1), sorted.end());
    const double threshold = sorted[static_cast<std::size_t>(d_n - 1)];
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < p; ++j)
        if (scores[j] <= threshold) keep.push_back(j);
    return keep;
}

}  // namespace mobs
