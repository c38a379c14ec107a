#pragma once

#include "ilbrl/mdp.hpp"

#include <string>
#include <string_view>

namespace ilbrl {

/// Text serialisation of a TabularMdp.
///
///     ilbrl-mdp 1
///     states <S>
///     actions <A>
///     discount <gamma>
///     initial <p_0> ... <p_{S-1}>
///     rewards
///     <S lines of A values>
///     transitions
///     <S*A lines of S values, ordered s-major then a>
///
/// Blank lines and lines starting with '#' are ignored. Numbers are written
/// in shortest round-trip form, so format -> parse is exact.
std::string format_mdp(const TabularMdp& mdp);
TabularMdp parse_mdp(std::string_view contents);

void save_mdp(const TabularMdp& mdp, const std::string& path);
TabularMdp load_mdp(const std::string& path);

}  // namespace ilbrl
