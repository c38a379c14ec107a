#include "ilbrl/stats.hpp"

#include "ilbrl/errors.hpp"
#include "ilbrl/parallel.hpp"
#include "ilbrl/random.hpp"
#include "ilbrl/text.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>

namespace ilbrl {

double normalized_score(double j, double j_random, double j_expert) {
    if (j_expert == j_random)
        throw InvalidArgument("normalized_score: expert and random returns coincide");
    return 100.0 * (j - j_random) / (j_expert - j_random);
}

namespace {

double iqm_sorted(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    const double lo = n / 4.0;
    const double hi = n - lo;
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = std::max(lo, static_cast<double>(i));
        const double b = std::min(hi, static_cast<double>(i + 1));
        if (b > a) sum += (b - a) * x[i];
    }
    return sum / (hi - lo);
}

}  // namespace

double iqm(std::span<const double> samples) {
    if (samples.empty()) throw InvalidArgument("iqm of an empty sample");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    return iqm_sorted(x);
}

double aggregate_iqm(const std::vector<std::vector<double>>& tasks) {
    if (tasks.empty()) throw InvalidArgument("aggregate_iqm needs at least one task");
    double sum = 0.0;
    for (const auto& t : tasks) sum += iqm(t);
    return sum / static_cast<double>(tasks.size());
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto below = static_cast<std::size_t>(std::floor(h));
    const std::size_t above = std::min(below + 1, sorted.size() - 1);
    return sorted[below] + (h - static_cast<double>(below)) * (sorted[above] - sorted[below]);
}

Interval stratified_bootstrap_iqm_ci(const std::vector<std::vector<double>>& tasks, int n_boot,
                                     double level, std::uint64_t seed, std::size_t workers) {
    if (n_boot < 100)
        throw InvalidArgument("stratified bootstrap needs at least 100 replicates, got " +
                              std::to_string(n_boot));
    if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("confidence level must lie in (0, 1)");
    for (const auto& t : tasks)
        if (t.empty()) throw InvalidArgument("stratified bootstrap: a task has no scores");
    Interval out;
    out.point = aggregate_iqm(tasks);

    std::vector<double> stats(static_cast<std::size_t>(n_boot));
    parallel_for(stats.size(), workers, [&](std::size_t r) {
        Rng rng(derive_seed(seed, "bootstrap", {r}));
        std::vector<double> resample;
        double sum = 0.0;
        for (const auto& t : tasks) {
            resample.resize(t.size());
            for (auto& v : resample) v = t[rng.below(t.size())];
            std::sort(resample.begin(), resample.end());
            sum += iqm_sorted(resample);
        }
        stats[r] = sum / static_cast<double>(tasks.size());
    });
    std::sort(stats.begin(), stats.end());
    const double tail = (1.0 - level) / 2.0;
    out.lo = quantile_sorted(stats, tail);
    out.hi = quantile_sorted(stats, 1.0 - tail);
    return out;
}

Interval mean_normal_ci(std::span<const double> samples, double level) {
    if (samples.empty()) throw InvalidArgument("mean_normal_ci of an empty sample");
    if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("confidence level must lie in (0, 1)");
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    const double sd = samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    const double z = boost::math::quantile(boost::math::normal(), 0.5 + level / 2.0);
    const double half = z * sd / std::sqrt(n);
    return {mean, mean - half, mean + half};
}

std::vector<double> performance_profile(std::span<const double> scores,
                                        std::span<const double> thresholds) {
    std::vector<double> out;
    out.reserve(thresholds.size());
    for (double tau : thresholds) {
        if (scores.empty()) {
            out.push_back(0.0);
            continue;
        }
        const auto above = std::count_if(scores.begin(), scores.end(), [&](double s) { return s > tau; });
        out.push_back(static_cast<double>(above) / static_cast<double>(scores.size()));
    }
    return out;
}

std::string format_profile_csv(std::span<const double> thresholds,
                               std::span<const double> fractions) {
    if (thresholds.size() != fractions.size())
        throw InvalidArgument("profile thresholds and fractions differ in length");
    std::string out = "threshold,fraction\n";
    for (std::size_t i = 0; i < thresholds.size(); ++i)
        out += text::format_double(thresholds[i]) + "," + text::format_double(fractions[i]) + "\n";
    return out;
}

}  // namespace ilbrl
