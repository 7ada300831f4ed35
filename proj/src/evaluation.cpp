#include "fseg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "fseg/error.hpp"
#include "fseg/log.hpp"
#include "fseg/random.hpp"

namespace fseg {

namespace {

void require_same_dims(const LabelMask& a, const LabelMask& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(fmt::format("{}: {} x {} vs {} x {}", what, a.rows(), a.cols(), b.rows(), b.cols()));
    }
}

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) {
        return std::nullopt;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

// ---------------------------------------------------------------------------
// Frequency matching
// ---------------------------------------------------------------------------

FrequencyMatrix::FrequencyMatrix(std::size_t n_clusters, std::size_t n_categories)
    : n_clusters_(n_clusters), n_categories_(n_categories), counts_(n_clusters * n_categories, 0) {
    if (n_clusters == 0 || n_categories == 0) {
        throw DimensionError("frequency matrix needs at least one cluster and one category");
    }
}

std::uint64_t FrequencyMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

std::vector<std::uint64_t> FrequencyMatrix::category_totals() const {
    std::vector<std::uint64_t> totals(n_categories_, 0);
    for (std::size_t c = 0; c < n_clusters_; ++c) {
        for (std::size_t g = 0; g < n_categories_; ++g) {
            totals[g] += at(c, g);
        }
    }
    return totals;
}

FrequencyMatrix& FrequencyMatrix::operator+=(const FrequencyMatrix& other) {
    if (other.n_clusters_ != n_clusters_ || other.n_categories_ != n_categories_) {
        throw DimensionError("cannot merge frequency matrices of different shapes");
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        counts_[i] += other.counts_[i];
    }
    return *this;
}

FrequencyMatrix accumulate_frequencies(const LabelMask& pred, const LabelMask& gt, FrequencyMatrix acc) {
    require_same_dims(pred, gt, "prediction and ground truth differ in size");
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (gt.is_ignored(i)) {
            continue;
        }
        if (pred[i] >= acc.n_clusters()) {
            throw InputError(fmt::format("predicted cluster {} out of range (n_clusters = {})", pred[i], acc.n_clusters()));
        }
        if (gt[i] >= acc.n_categories()) {
            throw InputError(fmt::format("category {} out of range (n_categories = {})", gt[i], acc.n_categories()));
        }
        acc.add(pred[i], gt[i]);
    }
    return acc;
}

ClusterMapping match_clusters(const FrequencyMatrix& freq, bool normalized) {
    if (freq.total() == 0) {
        throw InputError("frequency matrix is all-zero");
    }
    const auto totals = freq.category_totals();
    ClusterMapping mapping;
    mapping.map.assign(freq.n_clusters(), 0);
    mapping.n_categories = static_cast<std::uint32_t>(freq.n_categories());
    mapping.normalized = normalized;
    for (std::size_t c = 0; c < freq.n_clusters(); ++c) {
        std::optional<std::size_t> best;
        for (std::size_t g = 0; g < freq.n_categories(); ++g) {
            if (normalized && totals[g] == 0) {
                continue;
            }
            if (!best) {
                best = g;
                continue;
            }
            bool better = false;
            if (normalized) {
                // counts(c,g)/total_g > counts(c,b)/total_b, cross-multiplied.
                const auto lhs = static_cast<unsigned __int128>(freq.at(c, g)) * totals[*best];
                const auto rhs = static_cast<unsigned __int128>(freq.at(c, *best)) * totals[g];
                better = lhs > rhs;
            } else {
                better = freq.at(c, g) > freq.at(c, *best);
            }
            if (better) {
                best = g;
            }
        }
        std::uint64_t row_total = 0;
        for (std::size_t g = 0; g < freq.n_categories(); ++g) {
            row_total += freq.at(c, g);
        }
        if (row_total == 0) {
            log::warn("empty_cluster_row", {{"cluster", std::to_string(c)}, {"assigned_category", "0"}});
            continue;
        }
        mapping.map[c] = static_cast<std::uint32_t>(best.value_or(0));
    }
    return mapping;
}

LabelMask apply_mapping(const LabelMask& pred, const ClusterMapping& mapping) {
    std::vector<std::uint32_t> out(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] >= mapping.map.size()) {
            throw InputError(fmt::format("cluster label {} has no mapping (mapping covers {} clusters)", pred[i],
                                         mapping.map.size()));
        }
        out[i] = mapping.map[pred[i]];
    }
    return LabelMask(pred.rows(), pred.cols(), mapping.n_categories, std::move(out));
}

// ---------------------------------------------------------------------------
// F1
// ---------------------------------------------------------------------------

ConfusionMatrix::ConfusionMatrix(std::size_t n_categories) : n_(n_categories), counts_(n_categories * n_categories, 0) {
    if (n_categories == 0) {
        throw DimensionError("confusion matrix needs at least one category");
    }
}

void ConfusionMatrix::add(const LabelMask& pred, const LabelMask& gt) {
    require_same_dims(pred, gt, "prediction and ground truth differ in size");
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (gt.is_ignored(i)) {
            continue;
        }
        if (pred[i] >= n_ || gt[i] >= n_) {
            throw InputError(fmt::format("label out of range at pixel {}: pred {}, gt {}, n_categories {}", i, pred[i],
                                         gt[i], n_));
        }
        ++counts_[pred[i] * n_ + gt[i]];
    }
}

ConfusionMatrix confusion_from_frequencies(const FrequencyMatrix& freq, const ClusterMapping& mapping) {
    if (mapping.map.size() != freq.n_clusters() || mapping.n_categories != freq.n_categories()) {
        throw DimensionError("cluster mapping does not match the frequency matrix");
    }
    ConfusionMatrix confusion(freq.n_categories());
    for (std::size_t c = 0; c < freq.n_clusters(); ++c) {
        for (std::size_t g = 0; g < freq.n_categories(); ++g) {
            confusion.add(mapping.map[c], g, freq.at(c, g));
        }
    }
    return confusion;
}

F1Report f1_from_confusion(const ConfusionMatrix& confusion) {
    const std::size_t n = confusion.n_categories();
    F1Report report;
    report.per_class_f1.resize(n);
    report.per_class_precision.resize(n);
    report.per_class_recall.resize(n);
    report.pixel_counts.assign(n, 0);
    report.predicted_counts.assign(n, 0);
    std::uint64_t correct = 0;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t t = 0; t < n; ++t) {
            report.predicted_counts[p] += confusion.at(p, t);
            report.pixel_counts[t] += confusion.at(p, t);
        }
        correct += confusion.at(p, p);
    }
    for (const auto c : report.pixel_counts) {
        report.evaluated_pixels += c;
    }

    double macro_sum = 0.0;
    std::size_t macro_n = 0;
    for (std::size_t g = 0; g < n; ++g) {
        const std::uint64_t tp = confusion.at(g, g);
        const std::uint64_t pred = report.predicted_counts[g];
        const std::uint64_t truth = report.pixel_counts[g];
        report.per_class_precision[g] = ratio(tp, pred);
        report.per_class_recall[g] = ratio(tp, truth);
        // 2tp / (2tp + fp + fn) = 2tp / (pred + truth)
        report.per_class_f1[g] = ratio(2 * tp, pred + truth);
        if (truth > 0) {
            macro_sum += *report.per_class_f1[g];
            ++macro_n;
        }
    }
    if (macro_n > 0) {
        report.macro_f1 = macro_sum / static_cast<double>(macro_n);
    }
    report.micro_f1 = ratio(correct, report.evaluated_pixels);
    return report;
}

F1Report f1_report(const LabelMask& pred_categories, const LabelMask& gt, std::size_t n_categories) {
    ConfusionMatrix confusion(n_categories);
    confusion.add(pred_categories, gt);
    return f1_from_confusion(confusion);
}

// ---------------------------------------------------------------------------
// Linear probing
// ---------------------------------------------------------------------------

ProbeSet::ProbeSet(double threshold) : threshold_(threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw InputError(fmt::format("probe threshold {} outside (0, 1]", threshold));
    }
}

void ProbeSet::add(std::span<const float> feature, std::uint32_t label) {
    if (labels_.empty()) {
        if (feature.empty()) {
            throw DimensionError("probe feature is empty");
        }
        channels_ = feature.size();
    } else if (feature.size() != channels_) {
        throw DimensionError(fmt::format("probe feature has {} channels, set has {}", feature.size(), channels_));
    }
    features_.insert(features_.end(), feature.begin(), feature.end());
    labels_.push_back(label);
}

ProbeSet probe_collect(const Factorization& factorization, const LabelMask& concept_mask, const LabelMask& gt,
                       double threshold, ProbeSet acc) {
    require_same_dims(concept_mask, gt, "concept mask and ground truth differ in size");
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw InputError(fmt::format("probe threshold {} outside (0, 1]", threshold));
    }
    if (!acc.empty() && acc.threshold() != threshold) {
        throw InputError("probe set was collected with a different threshold");
    }
    if (acc.empty()) {
        acc = ProbeSet(threshold);
    }
    const std::size_t k = factorization.h.n_rows();
    const std::size_t n_cat = gt.n_labels();
    std::vector<std::uint64_t> counts(k * n_cat, 0);
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (gt.is_ignored(i)) {
            continue;
        }
        if (concept_mask[i] >= k) {
            throw InputError(fmt::format("concept label {} exceeds factorization rank {}", concept_mask[i], k));
        }
        ++counts[concept_mask[i] * n_cat + gt[i]];
    }
    for (std::size_t m = 0; m < k; ++m) {
        const auto first = counts.begin() + static_cast<std::ptrdiff_t>(m * n_cat);
        const auto last = first + static_cast<std::ptrdiff_t>(n_cat);
        const std::uint64_t total = std::accumulate(first, last, std::uint64_t{0});
        if (total == 0) {
            continue;
        }
        const auto best = std::max_element(first, last);  // first maximum: lowest category
        if (static_cast<double>(*best) >= threshold * static_cast<double>(total)) {
            acc.add(factorization.h.row(m), static_cast<std::uint32_t>(best - first));
        }
    }
    return acc;
}

ProbeObjective probe_objective(const ProbeSet& set, std::size_t n_categories, std::span<const double> weights,
                               std::span<const double> bias, double reg, bool use_bias) {
    const std::size_t n = set.size();
    const std::size_t d = set.channels();
    const std::size_t n_cat = n_categories;
    if (weights.size() != n_cat * d || bias.size() != n_cat) {
        throw DimensionError("probe parameters do not match the probe set");
    }
    ProbeObjective out;
    out.grad_weights.assign(n_cat * d, 0.0);
    out.grad_bias.assign(n_cat, 0.0);
    std::vector<double> z(n_cat);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = set.feature(i);
        for (std::size_t c = 0; c < n_cat; ++c) {
            double s = use_bias ? bias[c] : 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                s += weights[c * d + j] * static_cast<double>(x[j]);
            }
            z[c] = s;
        }
        const double zmax = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (const double v : z) {
            sum += std::exp(v - zmax);
        }
        const double lse = zmax + std::log(sum);
        const std::uint32_t y = set.labels()[i];
        out.loss += (lse - z[y]) * inv_n;
        for (std::size_t c = 0; c < n_cat; ++c) {
            const double g = (std::exp(z[c] - lse) - (c == y ? 1.0 : 0.0)) * inv_n;
            for (std::size_t j = 0; j < d; ++j) {
                out.grad_weights[c * d + j] += g * static_cast<double>(x[j]);
            }
            if (use_bias) {
                out.grad_bias[c] += g;
            }
        }
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
        out.loss += reg * weights[i] * weights[i];
        out.grad_weights[i] += 2.0 * reg * weights[i];
    }
    return out;
}

ProbeTrainResult probe_train_detailed(const ProbeSet& set, std::size_t n_categories, const ProbeTrainConfig& cfg) {
    if (set.empty()) {
        throw InsufficientDataError("probe set is empty (no concept passed the threshold)");
    }
    if (!(cfg.reg >= 0.0) || cfg.max_iters < 1 || !(cfg.grad_tol > 0.0)) {
        throw InputError("probe training needs reg >= 0, max_iters >= 1, grad_tol > 0");
    }
    std::vector<std::size_t> per_category(n_categories, 0);
    for (const auto label : set.labels()) {
        if (label >= n_categories) {
            throw InputError(fmt::format("probe label {} outside {} categories", label, n_categories));
        }
        ++per_category[label];
    }
    std::string missing;
    for (std::size_t c = 0; c < n_categories; ++c) {
        if (per_category[c] == 0) {
            missing += missing.empty() ? "" : ", ";
            missing += std::to_string(c);
        }
    }
    if (!missing.empty()) {
        std::string counts;
        for (std::size_t c = 0; c < n_categories; ++c) {
            counts += fmt::format("{}{}={}", c == 0 ? "" : " ", c, per_category[c]);
        }
        throw CoverageError(fmt::format("no probe examples for categories [{}] (counts: {})", missing, counts));
    }

    const std::size_t d = set.channels();
    const std::size_t n_w = n_categories * d;

    // Uniform feature scaling as a diagonal preconditioner: in coordinates
    // V = W / s with s^2 = 1 / mean ||x||^2 the logistic curvature is bounded
    // by 0.5 * (1 + bias) and the penalty adds 2 * reg * s^2.
    double mean_sq = 0.0;
    for (const float v : set.features().data) {
        mean_sq += static_cast<double>(v) * v;
    }
    mean_sq /= static_cast<double>(set.size());
    const double s2 = mean_sq > 0.0 ? 1.0 / mean_sq : 1.0;
    const double lipschitz = 0.5 * (1.0 + (cfg.use_bias ? 1.0 : 0.0)) + 2.0 * cfg.reg * s2;
    const double step_w = s2 / lipschitz;
    const double step_b = 1.0 / lipschitz;

    Rng rng(cfg.seed);
    std::vector<double> theta(n_w + n_categories, 0.0);
    for (std::size_t i = 0; i < n_w; ++i) {
        theta[i] = 1e-3 * std::sqrt(s2) * rng.normal();
    }
    std::vector<double> y = theta;
    std::vector<double> next(theta.size());
    double t = 1.0;

    auto evaluate = [&](const std::vector<double>& params) {
        return probe_objective(set, n_categories, std::span(params).first(n_w), std::span(params).subspan(n_w),
                               cfg.reg, cfg.use_bias);
    };
    auto grad_norm = [&](const ProbeObjective& obj) {
        double s = 0.0;
        for (const double g : obj.grad_weights) {
            s += g * g;
        }
        for (const double g : obj.grad_bias) {
            s += g * g;
        }
        return std::sqrt(s);
    };

    ProbeTrainResult result;
    ProbeObjective obj = evaluate(y);
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        const double norm = grad_norm(obj);
        if (norm < cfg.grad_tol) {
            theta = y;
            break;
        }
        for (std::size_t i = 0; i < n_w; ++i) {
            next[i] = y[i] - step_w * obj.grad_weights[i];
        }
        for (std::size_t c = 0; c < n_categories; ++c) {
            next[n_w + c] = y[n_w + c] - step_b * obj.grad_bias[c];
        }
        // Gradient restart: drop the momentum once it points uphill.
        double alignment = 0.0;
        for (std::size_t i = 0; i < n_w; ++i) {
            alignment += obj.grad_weights[i] * (next[i] - theta[i]);
        }
        for (std::size_t c = 0; c < n_categories; ++c) {
            alignment += obj.grad_bias[c] * (next[n_w + c] - theta[n_w + c]);
        }
        if (alignment > 0.0) {
            t = 1.0;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_next;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            y[i] = next[i] + beta * (next[i] - theta[i]);
        }
        theta.swap(next);
        t = t_next;
        obj = evaluate(y);
    }
    if (it == cfg.max_iters) {
        // Report the last iterate's own gradient rather than the extrapolated point's.
        obj = evaluate(theta);
        log::warn("probe_not_converged",
                  {{"iterations", std::to_string(it)}, {"gradient_norm", fmt::format("{:.3e}", grad_norm(obj))}});
    }
    result.iterations = it;
    result.gradient_norm = grad_norm(obj);
    result.loss = obj.loss;

    std::vector<float> w(n_w);
    for (std::size_t i = 0; i < n_w; ++i) {
        w[i] = static_cast<float>(theta[i]);
    }
    result.probe.weights = DenseMatrix(n_categories, d, std::move(w));
    result.probe.bias.resize(n_categories);
    for (std::size_t c = 0; c < n_categories; ++c) {
        result.probe.bias[c] = cfg.use_bias ? static_cast<float>(theta[n_w + c]) : 0.0F;
    }
    result.probe.use_bias = cfg.use_bias;
    return result;
}

LinearProbe probe_train(const ProbeSet& set, std::size_t n_categories, const ProbeTrainConfig& cfg) {
    return probe_train_detailed(set, n_categories, cfg).probe;
}

std::vector<std::uint32_t> probe_classify(const DenseMatrix& h, const LinearProbe& probe) {
    if (h.n_cols() != probe.weights.n_cols()) {
        throw DimensionError(
            fmt::format("concepts have {} channels, probe expects {}", h.n_cols(), probe.weights.n_cols()));
    }
    const std::size_t n_cat = probe.weights.n_rows();
    std::vector<std::uint32_t> out(h.n_rows(), 0);
    for (std::size_t m = 0; m < h.n_rows(); ++m) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < n_cat; ++c) {
            double s = probe.use_bias ? static_cast<double>(probe.bias[c]) : 0.0;
            for (std::size_t j = 0; j < h.n_cols(); ++j) {
                s += static_cast<double>(probe.weights(c, j)) * h(m, j);
            }
            if (s > best) {
                best = s;
                out[m] = static_cast<std::uint32_t>(c);
            }
        }
    }
    return out;
}

DenseMatrix probe_to_matrix(const LinearProbe& probe) {
    const std::size_t n_cat = probe.weights.n_rows();
    const std::size_t d = probe.weights.n_cols();
    DenseMatrix out(n_cat, d + 1);
    for (std::size_t c = 0; c < n_cat; ++c) {
        for (std::size_t j = 0; j < d; ++j) {
            out(c, j) = probe.weights(c, j);
        }
        out(c, d) = probe.use_bias ? probe.bias[c] : 0.0F;
    }
    return out;
}

}  // namespace fseg
