#pragma once

#include "ilbrl/generators.hpp"
#include "ilbrl/mdp.hpp"
#include "ilbrl/random.hpp"

#include <vector>

namespace fixtures {

/// Builds an MDP from nested tables: p[s][a][s'], r[s][a], uniform P0.
inline ilbrl::TabularMdp make_mdp(const std::vector<std::vector<std::vector<double>>>& p,
                                  const std::vector<std::vector<double>>& r, double discount) {
    const std::size_t S = p.size();
    const std::size_t A = p[0].size();
    std::vector<double> flat;
    ilbrl::Matrix rewards(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(A));
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < A; ++a) {
            flat.insert(flat.end(), p[s][a].begin(), p[s][a].end());
            rewards(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = r[s][a];
        }
    ilbrl::Vector initial = ilbrl::Vector::Constant(static_cast<Eigen::Index>(S), 1.0 / static_cast<double>(S));
    return ilbrl::TabularMdp(S, A, std::move(flat), std::move(rewards), std::move(initial), discount);
}

/// Single-action MDP whose chain is `chain`, with reward r[s].
inline ilbrl::TabularMdp chain_mdp(const std::vector<std::vector<double>>& chain,
                                   const std::vector<double>& r, double discount) {
    std::vector<std::vector<std::vector<double>>> p;
    std::vector<std::vector<double>> rr;
    for (std::size_t s = 0; s < chain.size(); ++s) {
        p.push_back({chain[s]});
        rr.push_back({r[s]});
    }
    return make_mdp(p, rr, discount);
}

inline ilbrl::TabularMdp random_mdp(std::uint64_t seed, std::size_t S, std::size_t A, double gamma,
                                    double min_probability = 0.01) {
    ilbrl::Rng rng(seed);
    return ilbrl::random_mdp(rng, ilbrl::MdpFamily{S, A, gamma, 1.0, min_probability, true});
}

inline std::vector<std::vector<double>> to_rows(const ilbrl::Matrix& m) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) rows[static_cast<std::size_t>(i)].push_back(m(i, j));
    return rows;
}

inline ilbrl::Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    ilbrl::Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

}  // namespace fixtures
