#pragma once

#include "ilbrl/dataset.hpp"

#include <map>
#include <string>
#include <string_view>

namespace ilbrl {

/// Tab-separated dataset file.
///
///     # ilbrl-dataset 1 states=S actions=A source=expert [key=value ...]
///     episode step s a r s_next a_next terminal timeout source
///     0 0 3 1 0.5 2 0 0 0 expert
///
/// A missing a_next is written as '-'. Extra header pairs carry provenance
/// (config hash, seed) and are returned by parse_dataset when requested.
std::string format_dataset(const TransitionDataset& data,
                           const std::map<std::string, std::string>& provenance = {});
TransitionDataset parse_dataset(std::string_view contents,
                                std::map<std::string, std::string>* provenance = nullptr);

void save_dataset(const TransitionDataset& data, const std::string& path,
                  const std::map<std::string, std::string>& provenance = {});
TransitionDataset load_dataset(const std::string& path,
                               std::map<std::string, std::string>* provenance = nullptr);

}  // namespace ilbrl
