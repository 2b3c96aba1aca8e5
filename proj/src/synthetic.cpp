#include "photorc/synthetic.hpp"

#include "photorc/errors.hpp"
#include "photorc/rng.hpp"

#include <algorithm>

namespace photorc {

SyntheticKind parse_synthetic_kind(const std::string& s) {
    if (s == "delayed-recall") return SyntheticKind::delayed_recall;
    if (s == "noisy-channel-classification" || s == "noisy-channel") return SyntheticKind::noisy_channel;
    throw InvalidParameter("unknown synthetic task '" + s + "'");
}

std::string to_string(SyntheticKind k) {
    return k == SyntheticKind::delayed_recall ? "delayed-recall" : "noisy-channel-classification";
}

std::vector<SequenceSample> synthetic_task(SyntheticKind kind, const SyntheticParams& p, std::uint64_t seed) {
    if (p.classes < 2 || p.per_class < 1 || p.length < 1 || p.dim < 1 || p.noise < 0.0 || p.distractor < 0.0 || p.distractor > 1.0) {
        throw InvalidParameter("synthetic task parameters out of range");
    }
    if (kind == SyntheticKind::delayed_recall && (p.delay < 0 || p.delay >= p.length)) {
        throw InvalidParameter("delay must lie in [0, length)");
    }
    Rng rng(seed);
    std::vector<Eigen::VectorXd> prototypes;
    for (int c = 0; c < p.classes; ++c) {
        Eigen::VectorXd v(p.dim);
        for (int k = 0; k < p.dim; ++k) v(k) = rng.uniform();
        prototypes.push_back(std::move(v));
    }
    auto noisy = [&](const Eigen::VectorXd& proto) {
        Eigen::VectorXd f(p.dim);
        for (int k = 0; k < p.dim; ++k) f(k) = std::clamp(proto(k) + p.noise * rng.normal(), 0.0, 1.0);
        return f;
    };

    std::vector<int> labels;
    for (int c = 0; c < p.classes; ++c) labels.insert(labels.end(), static_cast<std::size_t>(p.per_class), c);
    rng.shuffle(labels);

    std::vector<SequenceSample> out;
    out.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        SequenceSample s;
        s.label = labels[i];
        s.source_id = "syn-" + std::to_string(i);
        s.group = static_cast<int>(i % 10);
        const int cue = p.length - 1 - p.delay;
        for (int t = 0; t < p.length; ++t) {
            if (kind == SyntheticKind::noisy_channel || t == cue) {
                s.frames.push_back(noisy(prototypes[static_cast<std::size_t>(s.label)]));
            } else {
                Eigen::VectorXd f(p.dim);
                for (int k = 0; k < p.dim; ++k) f(k) = p.distractor * rng.uniform();
                s.frames.push_back(std::move(f));
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace photorc
