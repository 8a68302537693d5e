#include "mobs/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include <json.hpp>

#include "mobs/errors.hpp"

namespace mobs {

namespace {

// --- locale-independent number formatting ---------------------------------

std::string format_double(double v) {
    char buf[48];
    const auto res = std::to_chars(buf, buf + sizeof buf, v,
                                   std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& context) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    // std::from_chars does not accept a leading '+' or the "inf" spellings
    // produced by to_chars; handle the sign explicitly.
    bool negate = false;
    if (first != last && (*first == '+' || *first == '-')) {
        negate = *first == '-';
        ++first;
    }
    if (last - first == 3 && std::strncmp(first, "inf", 3) == 0)
        return negate ? -std::numeric_limits<double>::infinity()
                      : std::numeric_limits<double>::infinity();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw FormatError(context + ": cannot parse number '" + std::string(text) + "'");
    return negate ? -v : v;
}

long parse_long(std::string_view text, const std::string& context) {
    long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw FormatError(context + ": cannot parse integer '" + std::string(text) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t at = line.find(sep, start);
        if (at == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, at - start));
        start = at + 1;
    }
}

std::string_view strip(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open " + path.string() + " for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path,
                       std::ios::openmode extra = std::ios::openmode()) {
    std::ofstream out(path, std::ios::trunc | extra);
    if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
    return out;
}

void finish_out(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoFailure("error writing " + path.string());
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    if (in.bad()) throw IoFailure("error reading " + path.string());
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

// --- packed predictor header -----------------------------------------------

constexpr char kPackedMagic[4] = {'M', 'O', 'B', 'X'};
constexpr std::uint16_t kPackedVersion = 1;

}  // namespace

DatasetFormat parse_dataset_format(const std::string& name) {
    if (name == "csv") return DatasetFormat::csv;
    if (name == "packed") return DatasetFormat::packed;
    throw InvalidArgument("unknown dataset format '" + name + "' (use csv or packed)");
}

std::string to_string(DatasetFormat format) {
    return format == DatasetFormat::csv ? "csv" : "packed";
}

Eigen::VectorXd load_y_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw FormatError(path.string() + ": empty response file");
    Eigen::VectorXd y(static_cast<Eigen::Index>(lines.size()));
    for (std::size_t i = 0; i < lines.size(); ++i)
        y[static_cast<Eigen::Index>(i)] =
            parse_double(strip(lines[i]), path.string() + ":" + std::to_string(i + 1));
    return y;
}

void save_y_csv(const Eigen::Ref<const Eigen::VectorXd>& y,
                const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    for (Eigen::Index i = 0; i < y.size(); ++i) out << format_double(y[i]) << '\n';
    finish_out(out, path);
}

namespace {

// True iff every field is "NA" or a plain integer — used to spot an
// optional header row, which by definition fails this.
bool row_is_codes(const std::vector<std::string_view>& fields) {
    for (const auto& raw : fields) {
        const auto field = strip(raw);
        if (field == "NA") continue;
        long v = 0;
        const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
        if (res.ec != std::errc() || res.ptr != field.data() + field.size()) return false;
    }
    return true;
}

}  // namespace

CodeMatrix load_x_csv(const std::filesystem::path& path) {
    auto lines = read_lines(path);
    if (lines.empty()) throw FormatError(path.string() + ": empty predictor file");
    // A header row is optional; skip the first line when it cannot be codes.
    std::size_t first = row_is_codes(split(lines[0], ',')) ? 0 : 1;
    if (first == lines.size())
        throw FormatError(path.string() + ": no data rows after header");
    const auto n = static_cast<Eigen::Index>(lines.size() - first);
    Eigen::Index p = -1;
    CodeMatrix x;
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t row = first + static_cast<std::size_t>(i);
        const std::string where = path.string() + ":" + std::to_string(row + 1);
        const auto fields = split(lines[row], ',');
        if (p < 0) {
            p = static_cast<Eigen::Index>(fields.size());
            x.resize(n, p);
        } else if (static_cast<Eigen::Index>(fields.size()) != p) {
            throw FormatError(where + ": expected " + std::to_string(p) +
                              " fields, got " + std::to_string(fields.size()));
        }
        for (Eigen::Index j = 0; j < p; ++j) {
            const auto field = strip(fields[static_cast<std::size_t>(j)]);
            if (field == "NA") {
                x(i, j) = kMissingCode;
                continue;
            }
            const long code = parse_long(field, where);
            if (code < 0 || code > 254)
                throw FormatError(where + ": column " + std::to_string(j + 1) +
                                  ": unsupported cardinality (codes must lie in 0..254;"
                                  " use NA for missing)");
            x(i, j) = static_cast<std::uint8_t>(code);
        }
    }
    return x;
}

void save_x_csv(const Eigen::Ref<const CodeMatrix>& x, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (j) out << ',';
            if (x(i, j) == kMissingCode)
                out << "NA";
            else
                out << static_cast<int>(x(i, j));
        }
        out << '\n';
    }
    finish_out(out, path);
}

std::pair<CodeMatrix, Eigen::VectorXi> load_x_packed(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path.string() + " for reading");
    char magic[4];
    std::uint16_t version = 0;
    std::uint64_t n = 0, p = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    in.read(reinterpret_cast<char*>(&p), sizeof p);
    if (!in || std::memcmp(magic, kPackedMagic, 4) != 0)
        throw FormatError(path.string() + ": not a packed predictor file");
    if (version != kPackedVersion)
        throw FormatError(path.string() + ": unsupported packed version " +
                          std::to_string(version));
    if (n == 0 || p == 0)
        throw FormatError(path.string() + ": empty packed matrix");

    std::vector<std::uint8_t> level_bytes(p);
    in.read(reinterpret_cast<char*>(level_bytes.data()),
            static_cast<std::streamsize>(p));
    if (!in) throw FormatError(path.string() + ": truncated level table");
    Eigen::VectorXi levels(static_cast<Eigen::Index>(p));
    for (std::uint64_t j = 0; j < p; ++j) {
        if (level_bytes[j] < 2)
            throw FormatError(path.string() + ": column " + std::to_string(j + 1) +
                              " has fewer than 2 levels");
        levels[static_cast<Eigen::Index>(j)] = level_bytes[j];
    }

    // One allocation, one read: peak residency is the code matrix itself
    // plus small constants.
    CodeMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    in.read(reinterpret_cast<char*>(x.data()), static_cast<std::streamsize>(n * p));
    if (!in || static_cast<std::uint64_t>(in.gcount()) != n * p)
        throw FormatError(path.string() + ": truncated code block");
    return {std::move(x), std::move(levels)};
}

void save_x_packed(const Eigen::Ref<const CodeMatrix>& x,
                   const Eigen::Ref<const Eigen::VectorXi>& levels,
                   const std::filesystem::path& path) {
    if (levels.size() != x.cols())
        throw InvalidArgument("save_x_packed: levels size does not match columns");
    if (x.rows() < 1 || x.cols() < 1)
        throw InvalidArgument("save_x_packed: empty matrix");
    std::ofstream out = open_out(path, std::ios::binary);
    const std::uint64_t n = static_cast<std::uint64_t>(x.rows());
    const std::uint64_t p = static_cast<std::uint64_t>(x.cols());
    out.write(kPackedMagic, 4);
    out.write(reinterpret_cast<const char*>(&kPackedVersion), sizeof kPackedVersion);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&p), sizeof p);
    for (Eigen::Index j = 0; j < levels.size(); ++j) {
        if (levels[j] < 2 || levels[j] > 255)
            throw InvalidArgument("save_x_packed: levels must lie in 2..255");
        const auto byte = static_cast<std::uint8_t>(levels[j]);
        out.write(reinterpret_cast<const char*>(&byte), 1);
    }
    // Column-major storage matches the file layout exactly.
    out.write(reinterpret_cast<const char*>(x.data()),
              static_cast<std::streamsize>(n * p));
    finish_out(out, path);
}

Dataset load_dataset(const std::filesystem::path& y_path,
                     const std::filesystem::path& x_path, DatasetFormat format,
                     const std::filesystem::path& levels_path) {
    Dataset data;
    data.y = load_y_csv(y_path);
    if (format == DatasetFormat::packed) {
        if (!levels_path.empty())
            throw InvalidArgument("load_dataset: packed files carry their own level"
                                  " table; a levels sidecar is not accepted");
        auto [x, levels] = load_x_packed(x_path);
        data.x = std::move(x);
        data.levels = std::move(levels);
    } else {
        data.x = load_x_csv(x_path);
        if (!levels_path.empty()) {
            const auto lines = read_lines(levels_path);
            if (static_cast<Eigen::Index>(lines.size()) != data.x.cols())
                throw FormatError(levels_path.string() + ": expected " +
                                  std::to_string(data.x.cols()) + " level entries, got " +
                                  std::to_string(lines.size()));
            data.levels.resize(data.x.cols());
            for (std::size_t j = 0; j < lines.size(); ++j) {
                const std::string where =
                    levels_path.string() + ":" + std::to_string(j + 1);
                const long d = parse_long(strip(lines[j]), where);
                if (d < 2 || d > 255)
                    throw FormatError(where + ": levels must lie in 2..255");
                data.levels[static_cast<Eigen::Index>(j)] = static_cast<int>(d);
            }
        } else {
            // Levels are inferred per column: one past the largest observed
            // code, but at least binary.
            data.levels = Eigen::VectorXi::Constant(data.x.cols(), 2);
            for (Eigen::Index j = 0; j < data.x.cols(); ++j) {
                int top = 1;
                for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
                    const std::uint8_t code = data.x(i, j);
                    if (code != kMissingCode && code > top) top = code;
                }
                data.levels[j] = top + 1;
            }
        }
    }
    validate(data);
    return data;
}

void persist_chain(const ChainOutput& chain, const ChainConfig& cfg,
                   const std::filesystem::path& path) {
    validate(cfg);
    if (chain.draws.size() != static_cast<std::size_t>(cfg.keep))
        throw InvalidArgument("persist_chain: draw count does not match config");
    std::ofstream out = open_out(path);
    std::string line;
    for (std::size_t m = 0; m < chain.draws.size(); ++m) {
        const MixtureDraw& draw = chain.draws[m];
        const long iteration = cfg.burn_in + static_cast<long>(m + 1) * cfg.thin;
        line.clear();
        line += std::to_string(iteration);
        line += ';';
        for (Eigen::Index h = 0; h < draw.weights.size(); ++h) {
            if (h) line += ',';
            line += format_double(draw.weights[h]);
        }
        line += ';';
        for (Eigen::Index h = 0; h < draw.means.size(); ++h) {
            if (h) line += ',';
            line += format_double(draw.means[h]);
        }
        line += ';';
        for (Eigen::Index h = 0; h < draw.variances.size(); ++h) {
            if (h) line += ',';
            line += format_double(draw.variances[h]);
        }
        line += ';';
        for (Eigen::Index i = 0; i < draw.allocations.size(); ++i) {
            if (i) line += ',';
            line += std::to_string(draw.allocations[i]);
        }
        line += '\n';
        out << line;
    }
    finish_out(out, path);
}

ChainOutput load_chain(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw FormatError(path.string() + ": empty chain file");
    ChainOutput chain;
    chain.draws.reserve(lines.size());
    Eigen::Index k = -1, n = -1;
    for (std::size_t row = 0; row < lines.size(); ++row) {
        const std::string where = path.string() + ":" + std::to_string(row + 1);
        const auto parts = split(lines[row], ';');
        if (parts.size() != 5)
            throw FormatError(where + ": expected 5 ';'-separated sections");
        parse_long(strip(parts[0]), where);  // iteration index; shape-checked only

        MixtureDraw draw;
        const auto w = split(parts[1], ',');
        const auto mu = split(parts[2], ',');
        const auto v = split(parts[3], ',');
        const auto c = split(parts[4], ',');
        if (k < 0) k = static_cast<Eigen::Index>(w.size());
        if (n < 0) n = static_cast<Eigen::Index>(c.size());
        if (static_cast<Eigen::Index>(w.size()) != k ||
            static_cast<Eigen::Index>(mu.size()) != k ||
            static_cast<Eigen::Index>(v.size()) != k)
            throw FormatError(where + ": component count differs across sections or rows");
        if (static_cast<Eigen::Index>(c.size()) != n)
            throw FormatError(where + ": allocation count differs across rows");
        draw.weights.resize(k);
        draw.means.resize(k);
        draw.variances.resize(k);
        draw.allocations.resize(n);
        for (Eigen::Index h = 0; h < k; ++h) {
            draw.weights[h] = parse_double(strip(w[static_cast<std::size_t>(h)]), where);
            draw.means[h] = parse_double(strip(mu[static_cast<std::size_t>(h)]), where);
            draw.variances[h] = parse_double(strip(v[static_cast<std::size_t>(h)]), where);
        }
        for (Eigen::Index i = 0; i < n; ++i)
            draw.allocations[i] =
                static_cast<int>(parse_long(strip(c[static_cast<std::size_t>(i)]), where));
        try {
            validate(draw);
        } catch (const InvalidArgument& err) {
            throw FormatError(where + ": " + err.what());
        }
        chain.draws.push_back(std::move(draw));
    }
    return chain;
}

void write_results(const ScreeningResult& result, std::uint64_t seed,
                   const std::filesystem::path& path) {
    if (result.probs.size() != result.degenerate.size())
        throw InvalidArgument("write_results: inconsistent result sizes");
    std::ofstream out = open_out(path);
    out << "j,pi0,p11,p12,p13,degenerate\n";
    for (std::size_t j = 0; j < result.probs.size(); ++j) {
        const HypothesisProbs& row = result.probs[j];
        out << (j + 1) << ',' << format_double(row.p0) << ',' << format_double(row.p11)
            << ',' << format_double(row.p12) << ',' << format_double(row.p13) << ','
            << int(result.degenerate[j]) << '\n';
    }
    out << "# kappa: " << format_double(result.kappa[0]) << ' '
        << format_double(result.kappa[1]) << ' ' << format_double(result.kappa[2]) << ' '
        << format_double(result.kappa[3]) << '\n';
    out << "# iterations: " << result.iterations << '\n';
    out << "# converged: " << (result.converged ? 1 : 0) << '\n';
    out << "# seed: " << seed << '\n';
    finish_out(out, path);
}

Eigen::VectorXd LoadedResults::pi0() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(probs.size()));
    for (Eigen::Index j = 0; j < out.size(); ++j)
        out[j] = probs[static_cast<std::size_t>(j)].p0;
    return out;
}

LoadedResults load_results(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || lines[0] != "j,pi0,p11,p12,p13,degenerate")
        throw FormatError(path.string() + ": missing results header");
    LoadedResults out;
    bool saw_kappa = false, saw_iterations = false, saw_converged = false, saw_seed = false;
    for (std::size_t row = 1; row < lines.size(); ++row) {
        const std::string where = path.string() + ":" + std::to_string(row + 1);
        const std::string_view line = lines[row];
        if (line.rfind("# ", 0) == 0) {
            const auto body = line.substr(2);
            if (body.rfind("kappa: ", 0) == 0) {
                const auto vals = split(body.substr(7), ' ');
                if (vals.size() != 4) throw FormatError(where + ": kappa needs 4 entries");
                for (int i = 0; i < 4; ++i) out.kappa[i] = parse_double(strip(vals[i]), where);
                saw_kappa = true;
            } else if (body.rfind("iterations: ", 0) == 0) {
                out.iterations = static_cast<int>(parse_long(strip(body.substr(12)), where));
                saw_iterations = true;
            } else if (body.rfind("converged: ", 0) == 0) {
                out.converged = parse_long(strip(body.substr(11)), where) != 0;
                saw_converged = true;
            } else if (body.rfind("seed: ", 0) == 0) {
                const auto text = strip(body.substr(6));
                std::uint64_t v = 0;
                const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
                if (res.ec != std::errc() || res.ptr != text.data() + text.size())
                    throw FormatError(where + ": cannot parse seed");
                out.seed = v;
                saw_seed = true;
            } else {
                throw FormatError(where + ": unknown metadata line");
            }
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 6) throw FormatError(where + ": expected 6 fields");
        if (parse_long(strip(fields[0]), where) != static_cast<long>(out.probs.size()) + 1)
            throw FormatError(where + ": predictor indices must be 1..p in order");
        HypothesisProbs probs;
        probs.p0 = parse_double(strip(fields[1]), where);
        probs.p11 = parse_double(strip(fields[2]), where);
        probs.p12 = parse_double(strip(fields[3]), where);
        probs.p13 = parse_double(strip(fields[4]), where);
        const long degenerate = parse_long(strip(fields[5]), where);
        if (degenerate != 0 && degenerate != 1)
            throw FormatError(where + ": degenerate flag must be 0 or 1");
        try {
            validate(probs);
        } catch (const InvalidArgument& err) {
            throw FormatError(where + ": " + err.what());
        }
        out.probs.push_back(probs);
        out.degenerate.push_back(static_cast<std::uint8_t>(degenerate));
    }
    if (!saw_kappa || !saw_iterations || !saw_converged || !saw_seed)
        throw FormatError(path.string() + ": missing metadata trailer");
    if (out.probs.empty()) throw FormatError(path.string() + ": no result rows");
    return out;
}

void save_truth(const std::vector<Eigen::Index>& truth, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    for (Eigen::Index t : truth) {
        if (t < 0) throw InvalidArgument("save_truth: negative index");
        out << (t + 1) << '\n';
    }
    finish_out(out, path);
}

std::vector<Eigen::Index> load_truth(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    std::vector<Eigen::Index> truth;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto text = strip(lines[i]);
        if (text.empty()) continue;
        const long v = parse_long(text, path.string() + ":" + std::to_string(i + 1));
        if (v < 1)
            throw FormatError(path.string() + ":" + std::to_string(i + 1) +
                              ": indices are 1-based");
        truth.push_back(static_cast<Eigen::Index>(v - 1));
    }
    return truth;
}

void write_roc_csv(const RocCurve& curve, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "threshold,fpr,tpr\n";
    for (std::size_t i = 0; i < curve.threshold.size(); ++i)
        out << format_double(curve.threshold[i]) << ',' << format_double(curve.fpr[i])
            << ',' << format_double(curve.tpr[i]) << '\n';
    out << "# auc: " << format_double(curve.auc) << '\n';
    finish_out(out, path);
}

// --- run manifest -----------------------------------------------------------

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                ok = true;
                break;
            }
        if (!ok) throw FormatError(where + ": unknown key '" + item.key() + "'");
    }
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::filesystem::path& path) {
    if (path.empty() || path.is_absolute()) return path;
    return base / path;
}

}  // namespace

void validate(const RunManifest& manifest) {
    if (manifest.y_path.empty()) throw InvalidArgument("manifest: y path is required");
    if (manifest.x_path.empty()) throw InvalidArgument("manifest: x path is required");
    validate(manifest.hp);
    validate(manifest.chain);
    validate(manifest.screen);
}

void save_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
    validate(manifest);
    json hp{{"k", manifest.hp.k},
            {"alpha", manifest.hp.alpha},
            {"a", manifest.hp.a},
            {"b", manifest.hp.b},
            {"mu0", manifest.hp.mu0},
            {"q", manifest.hp.q},
            {"tau_omega", manifest.hp.tau_omega},
            {"tau_mu", manifest.hp.tau_mu},
            {"tau_sigma", manifest.hp.tau_sigma},
            {"kappa", {manifest.hp.kappa[0], manifest.hp.kappa[1], manifest.hp.kappa[2],
                       manifest.hp.kappa[3]}}};
    json chain{{"total_iters", manifest.chain.total_iters},
               {"burn_in", manifest.chain.burn_in},
               {"keep", manifest.chain.keep},
               {"thin", manifest.chain.thin}};
    json screen{{"tol", manifest.screen.tol},
                {"max_iter", manifest.screen.max_iter},
                {"threads", manifest.screen.threads},
                {"chunk_size", static_cast<std::int64_t>(manifest.screen.chunk_size)},
                {"mem_budget", manifest.screen.mem_budget},
                {"spill_dir", manifest.screen.spill_dir.string()}};
    json root{{"y", manifest.y_path.string()},
              {"x", manifest.x_path.string()},
              {"format", to_string(manifest.format)},
              {"output_dir", manifest.output_dir.string()},
              {"seed", manifest.seed},
              {"hyperparams", hp},
              {"chain", chain},
              {"screen", screen}};
    std::ofstream out = open_out(path);
    out << root.dump(2) << '\n';
    finish_out(out, path);
}

RunManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    json root;
    try {
        in >> root;
    } catch (const json::exception& err) {
        throw FormatError(path.string() + ": " + err.what());
    }
    if (!root.is_object()) throw FormatError(path.string() + ": manifest must be an object");

    RunManifest manifest;
    const std::string where = path.string();
    try {
        reject_unknown(root,
                       {"y", "x", "format", "output_dir", "seed", "hyperparams", "chain",
                        "screen"},
                       where);
        if (!root.contains("y") || !root.contains("x"))
            throw FormatError(where + ": manifest requires 'y' and 'x'");
        manifest.y_path = root.at("y").get<std::string>();
        manifest.x_path = root.at("x").get<std::string>();
        if (root.contains("format"))
            manifest.format = parse_dataset_format(root.at("format").get<std::string>());
        if (root.contains("output_dir"))
            manifest.output_dir = root.at("output_dir").get<std::string>();
        if (root.contains("seed")) manifest.seed = root.at("seed").get<std::uint64_t>();
        if (root.contains("hyperparams")) {
            const json& hp = root.at("hyperparams");
            reject_unknown(hp,
                           {"k", "alpha", "a", "b", "mu0", "q", "tau_omega", "tau_mu",
                            "tau_sigma", "kappa"},
                           where + ": hyperparams");
            if (hp.contains("k")) manifest.hp.k = hp.at("k").get<int>();
            if (hp.contains("alpha")) manifest.hp.alpha = hp.at("alpha").get<double>();
            if (hp.contains("a")) manifest.hp.a = hp.at("a").get<double>();
            if (hp.contains("b")) manifest.hp.b = hp.at("b").get<double>();
            if (hp.contains("mu0")) manifest.hp.mu0 = hp.at("mu0").get<double>();
            if (hp.contains("q")) manifest.hp.q = hp.at("q").get<double>();
            if (hp.contains("tau_omega"))
                manifest.hp.tau_omega = hp.at("tau_omega").get<double>();
            if (hp.contains("tau_mu")) manifest.hp.tau_mu = hp.at("tau_mu").get<double>();
            if (hp.contains("tau_sigma"))
                manifest.hp.tau_sigma = hp.at("tau_sigma").get<double>();
            if (hp.contains("kappa")) {
                const json& kappa = hp.at("kappa");
                if (!kappa.is_array() || kappa.size() != 4)
                    throw FormatError(where + ": kappa must be an array of 4 numbers");
                for (int i = 0; i < 4; ++i) manifest.hp.kappa[i] = kappa.at(i).get<double>();
            }
        }
        if (root.contains("chain")) {
            const json& chain = root.at("chain");
            reject_unknown(chain, {"total_iters", "burn_in", "keep", "thin"},
                           where + ": chain");
            if (chain.contains("total_iters"))
                manifest.chain.total_iters = chain.at("total_iters").get<int>();
            if (chain.contains("burn_in"))
                manifest.chain.burn_in = chain.at("burn_in").get<int>();
            if (chain.contains("keep")) manifest.chain.keep = chain.at("keep").get<int>();
            if (chain.contains("thin")) manifest.chain.thin = chain.at("thin").get<int>();
        }
        if (root.contains("screen")) {
            const json& screen = root.at("screen");
            reject_unknown(screen,
                           {"tol", "max_iter", "threads", "chunk_size", "mem_budget",
                            "spill_dir"},
                           where + ": screen");
            if (screen.contains("tol")) manifest.screen.tol = screen.at("tol").get<double>();
            if (screen.contains("max_iter"))
                manifest.screen.max_iter = screen.at("max_iter").get<int>();
            if (screen.contains("threads"))
                manifest.screen.threads = screen.at("threads").get<int>();
            if (screen.contains("chunk_size"))
                manifest.screen.chunk_size =
                    static_cast<Eigen::Index>(screen.at("chunk_size").get<std::int64_t>());
            if (screen.contains("mem_budget"))
                manifest.screen.mem_budget = screen.at("mem_budget").get<std::uint64_t>();
            if (screen.contains("spill_dir"))
                manifest.screen.spill_dir = screen.at("spill_dir").get<std::string>();
        }
    } catch (const json::exception& err) {
        throw FormatError(where + ": " + err.what());
    }

    // The chain seed follows the manifest seed.
    manifest.chain.seed = manifest.seed;

    // Relative paths are relative to the manifest's own directory.
    const std::filesystem::path base = path.has_parent_path()
                                           ? path.parent_path()
                                           : std::filesystem::path(".");
    manifest.y_path = resolve(base, manifest.y_path);
    manifest.x_path = resolve(base, manifest.x_path);
    if (manifest.output_dir.empty()) manifest.output_dir = base;
    else manifest.output_dir = resolve(base, manifest.output_dir);
    if (!manifest.screen.spill_dir.empty())
        manifest.screen.spill_dir = resolve(base, manifest.screen.spill_dir);

    validate(manifest);
    return manifest;
}

}  // namespace mobs
