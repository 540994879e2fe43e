#include "dstp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace dstp {

namespace {

std::vector<std::string> tokenize(const std::string& line, bool whitespace) {
    std::vector<std::string> out;
    if (whitespace) {
        std::istringstream is(line);
        std::string tok;
        while (is >> tok) out.push_back(tok);
    } else {
        std::string tok;
        std::istringstream is(line);
        while (std::getline(is, tok, ',')) out.push_back(tok);
        if (!line.empty() && line.back() == ',') out.push_back("");
    }
    return out;
}

bool parse_value(const std::string& tok, double& out) {
    if (tok.empty()) return false;
    if (tok == "NA" || tok == "NaN" || tok == "nan" || tok == "?") return false;
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') return false;
    if (!std::isfinite(v)) return false;
    out = v;
    return true;
}

// Interior gaps by linear interpolation, edges by nearest present value.
void fill_missing(std::vector<double>& col, const std::string& name) {
    std::size_t n = col.size();
    std::size_t first = n;
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isnan(col[i])) { first = i; break; }
    if (first == n) throw DataError("column entirely missing: " + name);
    for (std::size_t i = 0; i < first; ++i) col[i] = col[first];
    std::size_t last = first;
    for (std::size_t i = first + 1; i < n; ++i) {
        if (std::isnan(col[i])) continue;
        if (i > last + 1) {
            double lo = col[last], hi = col[i];
            double span = static_cast<double>(i - last);
            for (std::size_t j = last + 1; j < i; ++j)
                col[j] = lo + (hi - lo) * static_cast<double>(j - last) / span;
        }
        last = i;
    }
    for (std::size_t i = last + 1; i < n; ++i) col[i] = col[last];
}

bool is_binary(const std::vector<double>& col) {
    for (double v : col) {
        if (std::isnan(v)) continue;
        if (v != 0.0 && v != 1.0) return false;
    }
    return true;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

Table load(const DatasetSpec& spec) {
    std::ifstream in(spec.path);
    if (!in) throw DataError("cannot open dataset file: " + spec.path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty dataset file: " + spec.path);
    if (!line.empty() && line[0] == '#') line = line.substr(1);
    std::vector<std::string> header = tokenize(trim(line), spec.whitespace_delimited);
    for (auto& h : header) h = trim(h);

    std::size_t width = header.size();
    std::vector<std::vector<double>> cols(width);
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty()) continue;
        std::vector<std::string> toks = tokenize(t, spec.whitespace_delimited);
        for (std::size_t i = 0; i < width; ++i) {
            double v = std::numeric_limits<double>::quiet_NaN();
            if (i < toks.size()) parse_value(trim(toks[i]), v);
            cols[i].push_back(v);
        }
    }

    auto excluded = [&](const std::string& name) {
        return std::find(spec.exclude.begin(), spec.exclude.end(), name) != spec.exclude.end();
    };

    Table out;
    bool target_seen = false;
    for (std::size_t i = 0; i < width; ++i) {
        const std::string& name = header[i];
        bool is_target = (name == spec.target);
        if (!is_target) {
            if (excluded(name)) continue;
            if (spec.drop_binary && is_binary(cols[i])) continue;
        }
        fill_missing(cols[i], name);
        if (is_target) {
            out.target_index = out.cols.size();
            target_seen = true;
        }
        out.columns.push_back(name);
        out.cols.push_back(std::move(cols[i]));
    }
    if (!target_seen) throw DataError("target column not found: " + spec.target);
    return out;
}

SplitResult split_and_standardize(const Table& table, const DatasetSpec& spec) {
    std::size_t rows = table.rows();
    if (spec.train_size + spec.test_size > rows)
        throw DataError("split sizes " + std::to_string(spec.train_size) + "+" +
                        std::to_string(spec.test_size) + " exceed " + std::to_string(rows) +
                        " rows");
    if (spec.train_size == 0) throw DataError("train size must be positive");

    SplitResult r;
    r.train.columns = r.test.columns = table.columns;
    r.train.target_index = r.test.target_index = table.target_index;
    r.stats.target_index = table.target_index;

    for (std::size_t c = 0; c < table.width(); ++c) {
        const auto& col = table.cols[c];
        double mean = 0.0;
        for (std::size_t i = 0; i < spec.train_size; ++i) mean += col[i];
        mean /= static_cast<double>(spec.train_size);
        double var = 0.0;
        for (std::size_t i = 0; i < spec.train_size; ++i) {
            double d = col[i] - mean;
            var += d * d;
        }
        var /= static_cast<double>(spec.train_size);  // population convention
        double sd = std::sqrt(var);
        if (sd <= 0.0)
            throw DataError("constant column in training split: " + table.columns[c]);
        r.stats.mean.push_back(mean);
        r.stats.stddev.push_back(sd);

        std::vector<double> tr(spec.train_size), te(spec.test_size);
        for (std::size_t i = 0; i < spec.train_size; ++i) tr[i] = (col[i] - mean) / sd;
        for (std::size_t i = 0; i < spec.test_size; ++i)
            te[i] = (col[spec.train_size + i] - mean) / sd;
        r.train.cols.push_back(std::move(tr));
        r.test.cols.push_back(std::move(te));
    }
    return r;
}

std::vector<WindowSample> make_windows(const Table& table, std::size_t T, std::size_t tau) {
    std::size_t rows = table.rows();
    if (T < 1 || tau < 1) throw ContractError("make_windows: T and tau must be >= 1");
    if (T + tau > rows)
        throw ContractError("make_windows: need at least " + std::to_string(T + tau) +
                            " rows, got " + std::to_string(rows));

    std::size_t n = table.exogenous_count();
    std::vector<std::size_t> exo;
    for (std::size_t c = 0; c < table.width(); ++c)
        if (c != table.target_index) exo.push_back(c);
    const auto& target = table.cols[table.target_index];

    std::vector<WindowSample> out;
    out.reserve(rows - T - tau + 1);
    for (std::size_t s = 0; s + T + tau <= rows; ++s) {
        WindowSample w;
        w.X = Array::zeros({n, T});
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < T; ++j) w.X.at(k, j) = table.cols[exo[k]][s + j];
        w.y_hist.assign(target.begin() + s, target.begin() + s + T);
        w.future.assign(target.begin() + s + T, target.begin() + s + T + tau);
        w.origin = s + T - 1;
        out.push_back(std::move(w));
    }
    return out;
}

SyntheticResult synthesize(std::size_t n, std::size_t rows, std::size_t sparsity,
                           std::uint64_t seed) {
    if (sparsity < 1 || sparsity > n)
        throw ContractError("synthesize: sparsity must be in [1, n]");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    SyntheticResult r;
    static const double kCoeffs[] = {1.0, -0.7, 0.5, -0.4, 0.3, 0.25, -0.2, 0.15};
    for (std::size_t j = 0; j < sparsity; ++j) {
        r.informative.push_back(j * n / sparsity);
        r.coefficients.push_back(kCoeffs[j % 8]);
    }
    std::vector<double> offset(n, 0.0);
    for (std::size_t k : r.informative) offset[k] = kInformativeOffset;

    std::vector<std::vector<double>> exo(n, std::vector<double>(rows, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
        double prev = noise(rng);
        exo[k][0] = offset[k] + prev;
        for (std::size_t t = 1; t < rows; ++t) {
            prev = 0.8 * prev + 0.5 * noise(rng);
            exo[k][t] = offset[k] + prev;
        }
    }

    std::vector<double> target(rows, 0.0);
    target[0] = 0.01 * noise(rng);
    for (std::size_t t = 1; t < rows; ++t) {
        double v = 0.0;
        for (std::size_t j = 0; j < sparsity; ++j) {
            std::size_t k = r.informative[j];
            v += r.coefficients[j] * (exo[k][t - 1] - offset[k]);
        }
        target[t] = v + 0.01 * noise(rng);
    }

    for (std::size_t k = 0; k < n; ++k) {
        r.table.columns.push_back("x" + std::to_string(k));
        r.table.cols.push_back(std::move(exo[k]));
    }
    r.table.columns.push_back("y");
    r.table.cols.push_back(std::move(target));
    r.table.target_index = n;
    return r;
}

DatasetSpec dataset_spec_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    DatasetSpec spec;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key == "name") spec.name = val;
        else if (key == "path") spec.path = val;
        else if (key == "target") spec.target = val;
        else if (key == "exclude") {
            std::istringstream is(val);
            std::string item;
            while (std::getline(is, item, ',')) {
                item = trim(item);
                if (!item.empty()) spec.exclude.push_back(item);
            }
        } else if (key == "train_size") spec.train_size = std::stoul(val);
        else if (key == "test_size") spec.test_size = std::stoul(val);
        else if (key == "delimiter") spec.whitespace_delimited = (val == "whitespace");
        else if (key == "drop_binary") spec.drop_binary = (val == "true" || val == "1");
        else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key " + key);
    }
    return spec;
}

}  // namespace dstp
