#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mobs/gibbs.hpp"
#include "mobs/screening.hpp"
#include "mobs/simulate.hpp"
#include "mobs/types.hpp"

namespace mobs {

// All text I/O is locale-independent: doubles are written with
// std::to_chars at 17 significant digits and read with std::from_chars, so
// chain files round-trip bitwise.

enum class DatasetFormat { csv, packed };

DatasetFormat parse_dataset_format(const std::string& name);
std::string to_string(DatasetFormat format);

// --- response / predictor files -----------------------------------------

// y: one value per line.
Eigen::VectorXd load_y_csv(const std::filesystem::path& path);
void save_y_csv(const Eigen::Ref<const Eigen::VectorXd>& y,
                const std::filesystem::path& path);

// x as text: one row per line, comma-separated integer codes in 0..254;
// "NA" marks a missing value.  An optional header row is tolerated: if the
// first line does not parse as codes it is skipped.  Codes above 254 are an
// unsupported-cardinality error (255 is reserved for missing storage).
CodeMatrix load_x_csv(const std::filesystem::path& path);
void save_x_csv(const Eigen::Ref<const CodeMatrix>& x,
                const std::filesystem::path& path);

// x packed: little-endian binary.  Header: magic "MOBX", u16 version (= 1),
// u64 n, u64 p; then p bytes of per-column level counts; then the n * p
// codes column-major, one byte each, 255 = missing.  The loader reads
// straight into a single allocation, so peak residency is the matrix plus
// a constant.
std::pair<CodeMatrix, Eigen::VectorXi> load_x_packed(const std::filesystem::path& path);
void save_x_packed(const Eigen::Ref<const CodeMatrix>& x,
                   const Eigen::Ref<const Eigen::VectorXi>& levels,
                   const std::filesystem::path& path);

// Convenience: response + predictors in either format, validated.  In CSV
// mode levels are inferred per column as 1 + max observed code (floored at
// 2) unless a levels sidecar is given: a text file with one integer d_j >= 2
// per line, one line per predictor.  Packed files carry their own level
// table, so a sidecar alongside a packed matrix is rejected.
Dataset load_dataset(const std::filesystem::path& y_path,
                     const std::filesystem::path& x_path, DatasetFormat format,
                     const std::filesystem::path& levels_path = {});

// --- chain files ----------------------------------------------------------

// One retained draw per line:
//   <iteration>;w1,...,wk;m1,...,mk;v1,...,vk;c1,...,cn
// Iterations are the original 1-based sampler iterations of the retained
// states.  persist_chain/load_chain round-trip the draws bitwise; the
// log-joint trace is not persisted.
void persist_chain(const ChainOutput& chain, const ChainConfig& cfg,
                   const std::filesystem::path& path);
ChainOutput load_chain(const std::filesystem::path& path);

// --- screening results ------------------------------------------------

// CSV with header j,pi0,p11,p12,p13,degenerate (j is 1-based), then trailing
// '#'-prefixed metadata lines: fitted kappa, iteration count, convergence
// flag, and the run seed.
void write_results(const ScreeningResult& result, std::uint64_t seed,
                   const std::filesystem::path& path);

struct LoadedResults {
    std::vector<HypothesisProbs> probs;
    std::vector<std::uint8_t> degenerate;
    Eigen::Vector4d kappa;
    int iterations = 0;
    bool converged = false;
    std::uint64_t seed = 0;

    Eigen::VectorXd pi0() const;
};

LoadedResults load_results(const std::filesystem::path& path);

// --- truth lists and ROC curves -------------------------------------------

// One 1-based predictor index per line on disk; 0-based in memory.
void save_truth(const std::vector<Eigen::Index>& truth,
                const std::filesystem::path& path);
std::vector<Eigen::Index> load_truth(const std::filesystem::path& path);

// CSV with header threshold,fpr,tpr and a trailing "# auc: <value>" line.
void write_roc_csv(const RocCurve& curve, const std::filesystem::path& path);

// --- run manifest -----------------------------------------------------

// JSON description of a full screening run.  Unknown keys are rejected;
// relative paths are resolved against the manifest file's directory on
// load; validation happens before any heavy work.
struct RunManifest {
    std::filesystem::path y_path;
    std::filesystem::path x_path;
    DatasetFormat format = DatasetFormat::csv;
    std::filesystem::path output_dir = ".";
    std::uint64_t seed = 0;
    Hyperparams hp;
    ChainConfig chain;
    ScreenOptions screen;
};

void validate(const RunManifest& manifest);
void save_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest load_manifest(const std::filesystem::path& path);

}  // namespace mobs
