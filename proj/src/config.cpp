#include "photorc/config.hpp"

#include "photorc/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace photorc {

std::string to_string(DatasetKind k) {
    switch (k) {
        case DatasetKind::mnist: return "mnist";
        case DatasetKind::sequence_dir: return "sequence-dir";
        case DatasetKind::synthetic: return "synthetic";
    }
    return "?";
}

std::string to_string(CvProtocol p) {
    switch (p) {
        case CvProtocol::holdout: return "holdout";
        case CvProtocol::mnist_7fold: return "mnist-7fold";
        case CvProtocol::ti46_grouped: return "ti46-grouped-10fold";
        case CvProtocol::kth_central: return "kth-central-2fold";
    }
    return "?";
}

std::string to_string(BudgetRule r) { return r == BudgetRule::fixed ? "fixed" : "per-layer-100"; }

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_integral(const std::string& v, const std::string& key) {
    T out{};
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
        throw ConfigError(key + ": '" + v + "' is not an integer");
    }
    return out;
}

double parse_real(const std::string& v, const std::string& key) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw ConfigError(key + ": '" + v + "' is not a real");
    return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(key + ": '" + v + "' is not a bool (true/false)");
}

std::vector<int> parse_int_list(const std::string& v, const std::string& key) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_integral<int>(trim(item), key));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

std::string real_text(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string list_text(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

template <typename E>
E parse_enum(const std::string& v, const std::string& key, std::initializer_list<E> options) {
    for (E e : options) {
        if (to_string(e) == v) return e;
    }
    std::string allowed;
    for (E e : options) allowed += (allowed.empty() ? "" : "|") + to_string(e);
    throw ConfigError(key + ": '" + v + "' is not one of " + allowed);
}

struct Field {
    const char* section;
    const char* key;
    const char* type;
    std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

#define PHOTORC_INT(sec, name, member)                                                                  \
    Field{sec, name, "int",                                                                            \
          [](ExperimentConfig& c, const std::string& v, const std::string& k) { c.member = parse_integral<int>(v, k); }, \
          [](const ExperimentConfig& c) { return std::to_string(c.member); }}
#define PHOTORC_UINT(sec, name, member)                                                                 \
    Field{sec, name, "uint",                                                                           \
          [](ExperimentConfig& c, const std::string& v, const std::string& k) { c.member = parse_integral<std::uint64_t>(v, k); }, \
          [](const ExperimentConfig& c) { return std::to_string(c.member); }}
#define PHOTORC_REAL(sec, name, member)                                                                 \
    Field{sec, name, "real",                                                                           \
          [](ExperimentConfig& c, const std::string& v, const std::string& k) { c.member = parse_real(v, k); }, \
          [](const ExperimentConfig& c) { return real_text(c.member); }}
#define PHOTORC_BOOL(sec, name, member)                                                                 \
    Field{sec, name, "bool",                                                                           \
          [](ExperimentConfig& c, const std::string& v, const std::string& k) { c.member = parse_bool(v, k); }, \
          [](const ExperimentConfig& c) { return std::string(c.member ? "true" : "false"); }}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        Field{"run", "name", "string", [](ExperimentConfig& c, const std::string& v, const std::string&) { c.name = v; },
              [](const ExperimentConfig& c) { return c.name; }},

        Field{"dataset", "kind", "enum(mnist|sequence-dir|synthetic)",
              [](ExperimentConfig& c, const std::string& v, const std::string& k) {
                  c.dataset.kind = parse_enum(v, k, {DatasetKind::mnist, DatasetKind::sequence_dir, DatasetKind::synthetic});
              },
              [](const ExperimentConfig& c) { return to_string(c.dataset.kind); }},
        Field{"dataset", "path", "string",
              [](ExperimentConfig& c, const std::string& v, const std::string&) { c.dataset.path = v; },
              [](const ExperimentConfig& c) { return c.dataset.path; }},
        PHOTORC_INT("dataset", "mnist_train", dataset.mnist_train),
        PHOTORC_INT("dataset", "mnist_test", dataset.mnist_test),
        PHOTORC_INT("dataset", "hog_cell", dataset.hog.cell_size),
        PHOTORC_INT("dataset", "hog_block", dataset.hog.block_size),
        PHOTORC_INT("dataset", "hog_bins", dataset.hog.n_orientations),
        PHOTORC_BOOL("dataset", "hog_signed", dataset.hog.signed_orientation),
        PHOTORC_INT("dataset", "pca_components", dataset.pca_components),
        PHOTORC_BOOL("dataset", "pca_per_position", dataset.pca_per_position),
        PHOTORC_BOOL("dataset", "ti46_mode", dataset.ti46_mode),
        PHOTORC_REAL("dataset", "holdout_test_fraction", dataset.holdout_test_fraction),
        Field{"dataset", "synthetic_kind", "enum(delayed-recall|noisy-channel-classification)",
              [](ExperimentConfig& c, const std::string& v, const std::string& k) {
                  c.dataset.synthetic_kind =
                      parse_enum(v, k, {SyntheticKind::delayed_recall, SyntheticKind::noisy_channel});
              },
              [](const ExperimentConfig& c) { return to_string(c.dataset.synthetic_kind); }},
        PHOTORC_INT("dataset", "synthetic_classes", dataset.synthetic.classes),
        PHOTORC_INT("dataset", "synthetic_per_class", dataset.synthetic.per_class),
        PHOTORC_INT("dataset", "synthetic_length", dataset.synthetic.length),
        PHOTORC_INT("dataset", "synthetic_dim", dataset.synthetic.dim),
        PHOTORC_INT("dataset", "synthetic_delay", dataset.synthetic.delay),
        PHOTORC_REAL("dataset", "synthetic_noise", dataset.synthetic.noise),
        PHOTORC_REAL("dataset", "synthetic_distractor", dataset.synthetic.distractor),

        PHOTORC_INT("reservoir", "depth", reservoir.deep.depth),
        PHOTORC_INT("reservoir", "total_neurons", reservoir.deep.total_neurons),
        Field{"reservoir", "allocation", "enum(decreasing|uniform|increasing)",
              [](ExperimentConfig& c, const std::string& v, const std::string& k) {
                  c.reservoir.deep.allocation =
                      parse_enum(v, k, {Allocation::decreasing, Allocation::uniform, Allocation::increasing});
              },
              [](const ExperimentConfig& c) { return to_string(c.reservoir.deep.allocation); }},
        PHOTORC_REAL("reservoir", "gamma", reservoir.deep.gamma),
        PHOTORC_REAL("reservoir", "alpha_first", reservoir.deep.alpha_first),
        PHOTORC_REAL("reservoir", "alpha_last", reservoir.deep.alpha_last),
        Field{"reservoir", "bias_profile", "enum(uniform|mild-increasing)",
              [](ExperimentConfig& c, const std::string& v, const std::string& k) {
                  c.reservoir.deep.bias_profile = parse_enum(v, k, {BiasProfile::uniform, BiasProfile::mild_increasing});
              },
              [](const ExperimentConfig& c) { return to_string(c.reservoir.deep.bias_profile); }},
        PHOTORC_REAL("reservoir", "bias_base", reservoir.deep.bias_base),
        PHOTORC_REAL("reservoir", "bias_increment", reservoir.deep.bias_increment),
        PHOTORC_INT("reservoir", "bias_width", reservoir.deep.bias_width),
        PHOTORC_INT("reservoir", "n_bin", reservoir.deep.n_bin),
        PHOTORC_REAL("reservoir", "calibration_percentile", reservoir.deep.calibration_percentile),
        PHOTORC_INT("reservoir", "calibration_samples", reservoir.calibration_samples),
        PHOTORC_INT("reservoir", "calibration_iterations", reservoir.calibration_iterations),
        PHOTORC_INT("reservoir", "washout", reservoir.deep.washout),
        Field{"reservoir", "aggregation", "enum(final|mean|concat-all-steps)",
              [](ExperimentConfig& c, const std::string& v, const std::string& k) {
                  c.reservoir.aggregation =
                      parse_enum(v, k, {Aggregation::final_step, Aggregation::mean, Aggregation::concat_all_steps});
              },
              [](const ExperimentConfig& c) { return to_string(c.reservoir.aggregation); }},
        PHOTORC_INT("reservoir", "batch_size", reservoir.batch_size),

        PHOTORC_REAL("readout", "lambda_min", readout.lambda_min),
        PHOTORC_REAL("readout", "lambda_max", readout.lambda_max),
        PHOTORC_INT("readout", "lambda_points", readout.lambda_points),
        PHOTORC_INT("readout", "folds", readout.folds),
        PHOTORC_BOOL("readout", "standardize", readout.standardize),

        Field{"protocol", "cv", "enum(holdout|mnist-7fold|ti46-grouped-10fold|kth-central-2fold)",
              [](ExperimentConfig& c, const std::string& v, const std::string& k) {
                  c.protocol.cv = parse_enum(v, k, {CvProtocol::holdout, CvProtocol::mnist_7fold,
                                                    CvProtocol::ti46_grouped, CvProtocol::kth_central});
              },
              [](const ExperimentConfig& c) { return to_string(c.protocol.cv); }},
        PHOTORC_INT("protocol", "repetitions", protocol.repetitions),

        PHOTORC_UINT("seeds", "optics", seeds.optics),
        PHOTORC_UINT("seeds", "bias", seeds.bias),
        PHOTORC_UINT("seeds", "shuffle", seeds.shuffle),
        PHOTORC_UINT("seeds", "data", seeds.data),

        Field{"sweep", "depths", "int-list",
              [](ExperimentConfig& c, const std::string& v, const std::string& k) { c.sweep.depths = parse_int_list(v, k); },
              [](const ExperimentConfig& c) { return list_text(c.sweep.depths); }},
        Field{"sweep", "budgets", "int-list",
              [](ExperimentConfig& c, const std::string& v, const std::string& k) { c.sweep.budgets = parse_int_list(v, k); },
              [](const ExperimentConfig& c) { return list_text(c.sweep.budgets); }},
        Field{"sweep", "budget_rule", "enum(fixed|per-layer-100)",
              [](ExperimentConfig& c, const std::string& v, const std::string& k) {
                  c.sweep.budget_rule = parse_enum(v, k, {BudgetRule::fixed, BudgetRule::per_layer_100});
              },
              [](const ExperimentConfig& c) { return to_string(c.sweep.budget_rule); }},

        Field{"output", "dir", "string",
              [](ExperimentConfig& c, const std::string& v, const std::string&) { c.output.dir = v; },
              [](const ExperimentConfig& c) { return c.output.dir; }},
    };
    return table;
}

#undef PHOTORC_INT
#undef PHOTORC_UINT
#undef PHOTORC_REAL
#undef PHOTORC_BOOL

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig c;
    std::string section;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(raw.substr(0, hash));
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (std::none_of(fields().begin(), fields().end(), [&](const Field& f) { return section == f.section; })) {
                throw ConfigError(where + ": unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        const std::string full = section + "." + key;
        const Field* field = nullptr;
        for (const auto& f : fields()) {
            if (section == f.section && key == f.key) field = &f;
        }
        if (!field) throw ConfigError(where + ": unknown key '" + full + "'");
        if (!seen.insert(full).second) throw ConfigError(where + ": duplicate key '" + full + "'");
        try {
            field->set(c, value, full);
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string render_config(const ExperimentConfig& config) {
    std::string out;
    std::string section;
    for (const auto& f : fields()) {
        if (section != f.section) {
            section = f.section;
            out += (out.empty() ? "[" : "\n[") + section + "]\n";
        }
        out += std::string(f.key) + " = " + f.get(config) + "  # " + f.type + "\n";
    }
    return out;
}

std::string config_digest(const ExperimentConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : render_config(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace photorc
