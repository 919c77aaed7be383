#include "purify/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace purify {

namespace {

// log w_i + log N(x; m_i, v_i I) for every component.
Vec component_log_terms(const GmmModel& gmm, const Vec& x) {
    const double d = static_cast<double>(x.size());
    Vec terms(gmm.components());
    for (std::size_t i = 0; i < gmm.components(); ++i) {
        const double v = gmm.variances[i];
        const double sq = (x - gmm.means[i]).squaredNorm();
        terms[i] = std::log(gmm.weights[i]) - 0.5 * sq / v -
                   0.5 * d * std::log(2.0 * std::numbers::pi * v);
    }
    return terms;
}

double log_sum_exp(const Vec& terms) {
    const double top = terms.maxCoeff();
    return top + std::log((terms.array() - top).exp().sum());
}

}  // namespace

int GmmModel::num_classes() const {
    if (!labels || labels->empty()) return 0;
    return *std::max_element(labels->begin(), labels->end()) + 1;
}

void GmmModel::validate() const {
    if (weights.empty()) throw std::invalid_argument("weights: mixture has no components");
    if (means.size() != weights.size() || variances.size() != weights.size())
        throw std::invalid_argument("means/variances: length differs from weights");
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("weights: must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("weights: must sum to 1");
    for (const auto& m : means)
        if (m.size() != means.front().size())
            throw std::invalid_argument("means: dimensions differ");
    for (double v : variances)
        if (!(v > 0.0)) throw std::invalid_argument("variances: must be positive");
    if (labels) {
        if (labels->size() != weights.size())
            throw std::invalid_argument("labels: length differs from weights");
        for (int l : *labels)
            if (l < 0) throw std::invalid_argument("labels: must be nonnegative");
    }
}

GmmModel benchmark_gmm() {
    GmmModel g;
    const double c = 1.5;
    g.weights = {0.25, 0.25, 0.25, 0.25};
    g.means = {Vec{{c, c}}, Vec{{-c, -c}}, Vec{{c, -c}}, Vec{{-c, c}}};
    g.variances = {0.09, 0.09, 0.09, 0.09};
    g.labels = std::vector<int>{0, 0, 1, 1};
    return g;
}

GmmModel diffused_mixture(const GmmModel& gmm, const ScheduleParams& s, double t) {
    const auto m = conditional_scale_std(s, t);
    GmmModel out = gmm;
    for (std::size_t i = 0; i < gmm.components(); ++i) {
        out.means[i] = m.scale * gmm.means[i];
        out.variances[i] = m.scale * m.scale * gmm.variances[i] + m.std * m.std;
    }
    return out;
}

double log_density(const GmmModel& gmm, const Vec& x) {
    return log_sum_exp(component_log_terms(gmm, x));
}

Vec responsibilities(const GmmModel& gmm, const Vec& x) {
    Vec terms = component_log_terms(gmm, x);
    const double lse = log_sum_exp(terms);
    return (terms.array() - lse).exp().matrix();
}

Vec mixture_score(const GmmModel& gmm, const Vec& x) {
    const Vec r = responsibilities(gmm, x);
    Vec g = Vec::Zero(x.size());
    for (std::size_t i = 0; i < gmm.components(); ++i)
        g += r[i] * (gmm.means[i] - x) / gmm.variances[i];
    return g;
}

Vec score(const GmmModel& gmm, const ScheduleParams& s, const Vec& x, double t) {
    return mixture_score(diffused_mixture(gmm, s, t), x);
}

ScoreFn make_score_fn(const GmmModel& gmm, const ScheduleParams& s) {
    gmm.validate();
    return [gmm, s](const Vec& x, double t) -> Vec {
        const auto m = conditional_scale_std(s, t);
        const std::size_t k = gmm.components();
        const double d = static_cast<double>(x.size());
        Vec log_terms(k);
        std::vector<double> var(k);
        for (std::size_t i = 0; i < k; ++i) {
            var[i] = m.scale * m.scale * gmm.variances[i] + m.std * m.std;
            const double sq = (x - m.scale * gmm.means[i]).squaredNorm();
            log_terms[i] = std::log(gmm.weights[i]) - 0.5 * sq / var[i] - 0.5 * d * std::log(var[i]);
        }
        const double top = log_terms.maxCoeff();
        Vec r = (log_terms.array() - top).exp().matrix();
        r /= r.sum();
        Vec g = Vec::Zero(x.size());
        for (std::size_t i = 0; i < k; ++i) g += (r[i] / var[i]) * (m.scale * gmm.means[i] - x);
        return g;
    };
}

LabeledDataset sample_dataset(const GmmModel& gmm, std::size_t n, std::uint64_t seed) {
    if (!gmm.labels) throw std::invalid_argument("labels: dataset sampling needs a labeled mixture");
    LabeledDataset data;
    data.seed = seed;
    data.points.reserve(n);
    data.labels.reserve(n);
    Rng rng(derive_seed(seed, {0x5a3b1eULL}));
    std::discrete_distribution<std::size_t> pick(gmm.weights.begin(), gmm.weights.end());
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = pick(rng);
        Vec z = standard_normal(rng, gmm.dim());
        data.points.push_back(gmm.means[i] + std::sqrt(gmm.variances[i]) * z);
        data.labels.push_back((*gmm.labels)[i]);
    }
    return data;
}

void write_dataset_csv(std::ostream& out, const LabeledDataset& data) {
    out << std::setprecision(17);
    for (std::size_t k = 0; k < data.size(); ++k) {
        for (Eigen::Index j = 0; j < data.points[k].size(); ++j) out << data.points[k][j] << ',';
        out << data.labels[k] << '\n';
    }
}

LabeledDataset read_dataset_csv(std::istream& in) {
    LabeledDataset data;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 2)
            throw std::runtime_error("dataset line " + std::to_string(line_no) + ": too few columns");
        Vec p(static_cast<Eigen::Index>(cells.size() - 1));
        try {
            for (std::size_t j = 0; j + 1 < cells.size(); ++j) p[j] = std::stod(cells[j]);
            data.labels.push_back(std::stoi(cells.back()));
        } catch (const std::exception&) {
            throw std::runtime_error("dataset line " + std::to_string(line_no) + ": bad number");
        }
        if (!data.points.empty() && data.points.front().size() != p.size())
            throw std::runtime_error("dataset line " + std::to_string(line_no) + ": dimension changes");
        data.points.push_back(std::move(p));
    }
    return data;
}

}  // namespace purify
