#include "ilbrl/phased_q.hpp"

#include "ilbrl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ilbrl {

namespace {

void check_dims(const ParallelSamples& samples, const Matrix& reward) {
    if (static_cast<std::size_t>(reward.rows()) != samples.num_states ||
        static_cast<std::size_t>(reward.cols()) != samples.num_actions)
        throw InvalidArgument("reward table dimensions do not match the samples");
    if (samples.buckets.size() != samples.num_states * samples.num_actions)
        throw InvalidArgument("sample buckets do not cover the state-action space");
}

void check_discount(double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("discount must lie in [0, 1)");
}

// Update using samples [begin, begin + m) of each bucket.
ValueTable update_range(const ValueTable& q, const ParallelSamples& samples, const Matrix& reward,
                        double gamma, std::size_t begin, std::size_t m) {
    const Vector v = q.max_values();
    ValueTable out{Matrix(reward.rows(), reward.cols())};
    for (std::size_t s = 0; s < samples.num_states; ++s)
        for (std::size_t a = 0; a < samples.num_actions; ++a) {
            const auto& b = samples.bucket(s, a);
            double sum = 0.0;
            for (std::size_t k = begin; k < begin + m; ++k)
                sum += v(b[k]);
            out.q(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) =
                reward(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) +
                gamma * sum / static_cast<double>(m);
        }
    return out;
}

}  // namespace

ValueTable phased_q_update(const ValueTable& q, const ParallelSamples& samples,
                           const Matrix& reward, double gamma) {
    check_dims(samples, reward);
    check_discount(gamma);
    if (q.q.rows() != reward.rows() || q.q.cols() != reward.cols())
        throw InvalidArgument("value table dimensions do not match the reward table");
    const Vector v = q.max_values();
    ValueTable out{Matrix(reward.rows(), reward.cols())};
    for (std::size_t s = 0; s < samples.num_states; ++s)
        for (std::size_t a = 0; a < samples.num_actions; ++a) {
            const auto& b = samples.bucket(s, a);
            if (b.empty())
                throw InvalidArgument("empty sample bucket at (" + std::to_string(s) + ", " +
                                      std::to_string(a) + ")");
            double sum = 0.0;
            for (int next : b) sum += v(next);
            out.q(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) =
                reward(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) +
                gamma * sum / static_cast<double>(b.size());
        }
    return out;
}

PhasedQResult phased_q_learn(const ParallelSamples& samples, const Matrix& reward, double gamma,
                             int ell) {
    check_dims(samples, reward);
    check_discount(gamma);
    if (ell < 1) throw InvalidArgument("phased Q-learning needs at least one phase");
    const int m = samples.per_pair_count / ell;
    if (m < 1)
        throw InvalidArgument("need at least " + std::to_string(ell) +
                              " samples per pair for " + std::to_string(ell) + " phases");
    for (const auto& b : samples.buckets)
        if (b.size() < static_cast<std::size_t>(m) * static_cast<std::size_t>(ell))
            throw InvalidArgument("a sample bucket is shorter than per_pair_count");
    PhasedQResult out;
    out.samples_per_phase = m;
    out.q.q = Matrix::Zero(reward.rows(), reward.cols());
    out.bootstrap_values.reserve(static_cast<std::size_t>(ell));
    for (int i = 0; i < ell; ++i) {
        out.bootstrap_values.push_back(out.q.max_values());
        out.q = update_range(out.q, samples, reward, gamma,
                             static_cast<std::size_t>(i) * static_cast<std::size_t>(m),
                             static_cast<std::size_t>(m));
    }
    out.policy = greedy_policy(out.q);
    return out;
}

PhasedQResult phased_q_learn_exact(const TabularMdp& mdp, const Matrix& reward, double gamma,
                                   int ell) {
    check_discount(gamma);
    if (ell < 1) throw InvalidArgument("phased Q-learning needs at least one phase");
    if (static_cast<std::size_t>(reward.rows()) != mdp.num_states() ||
        static_cast<std::size_t>(reward.cols()) != mdp.num_actions())
        throw InvalidArgument("reward table dimensions do not match the MDP");
    PhasedQResult out;
    out.q.q = Matrix::Zero(reward.rows(), reward.cols());
    for (int i = 0; i < ell; ++i) {
        out.bootstrap_values.push_back(out.q.max_values());
        out.q.q = reward + gamma * expected_next_values(mdp, out.bootstrap_values.back());
    }
    out.policy = greedy_policy(out.q);
    return out;
}

double max_concentration_error(const TabularMdp& mdp, const ParallelSamples& samples,
                               const PhasedQResult& result) {
    const auto m = static_cast<std::size_t>(result.samples_per_phase);
    if (m == 0) throw InvalidArgument("result was not produced from samples");
    double worst = 0.0;
    for (std::size_t i = 0; i < result.bootstrap_values.size(); ++i) {
        const Vector& v = result.bootstrap_values[i];
        const Matrix expected = expected_next_values(mdp, v);
        for (std::size_t s = 0; s < mdp.num_states(); ++s)
            for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
                const auto& b = samples.bucket(s, a);
                double sum = 0.0;
                for (std::size_t k = i * m; k < (i + 1) * m; ++k) sum += v(b[k]);
                const double gap = std::abs(sum / static_cast<double>(m) -
                                            expected(static_cast<Eigen::Index>(s),
                                                     static_cast<Eigen::Index>(a)));
                worst = std::max(worst, gap);
            }
    }
    return worst;
}

}  // namespace ilbrl
