#include "ilbrl/dataset_io.hpp"

#include "ilbrl/errors.hpp"
#include "ilbrl/text.hpp"

#include <sstream>

namespace ilbrl {

namespace {

constexpr std::string_view kMagic = "ilbrl-dataset";
constexpr std::string_view kColumns =
    "episode\tstep\ts\ta\tr\ts_next\ta_next\tterminal\ttimeout\tsource";

bool parse_flag(std::string_view token) {
    if (token == "0") return false;
    if (token == "1") return true;
    throw ParseError("flag must be 0 or 1, got '" + std::string(token) + "'");
}

}  // namespace

std::string format_dataset(const TransitionDataset& data,
                           const std::map<std::string, std::string>& provenance) {
    std::ostringstream out;
    out << "# " << kMagic << " 1 states=" << data.num_states << " actions=" << data.num_actions
        << " source=" << to_string(data.source);
    for (const auto& [key, value] : provenance) {
        if (key.find_first_of(" \t=\n") != std::string::npos ||
            value.find_first_of(" \t\n") != std::string::npos)
            throw InvalidArgument("provenance entries may not contain whitespace: " + key);
        out << ' ' << key << '=' << value;
    }
    out << '\n' << kColumns << '\n';
    for (const auto& r : data.records) {
        out << r.episode << '\t' << r.step << '\t' << r.state << '\t' << r.action << '\t'
            << text::format_double(r.reward) << '\t' << r.next_state << '\t';
        if (r.next_action)
            out << *r.next_action;
        else
            out << '-';
        out << '\t' << (r.terminal ? 1 : 0) << '\t' << (r.timeout ? 1 : 0) << '\t'
            << to_string(r.source) << '\n';
    }
    return out.str();
}

TransitionDataset parse_dataset(std::string_view contents,
                                std::map<std::string, std::string>* provenance) {
    TransitionDataset data;
    bool have_header = false;
    bool have_columns = false;
    bool have_states = false;
    bool have_actions = false;
    std::size_t line_no = 0;
    while (!contents.empty()) {
        const auto eol = contents.find('\n');
        std::string_view line = contents.substr(0, eol);
        contents = eol == std::string_view::npos ? std::string_view{} : contents.substr(eol + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        const std::string where = "dataset line " + std::to_string(line_no) + ": ";
        if (!have_header) {
            const auto tokens = text::split_ws(line);
            if (tokens.size() < 3 || tokens[0] != "#" || tokens[1] != kMagic || tokens[2] != "1")
                throw ParseError(where + "missing '# ilbrl-dataset 1' header");
            for (std::size_t i = 3; i < tokens.size(); ++i) {
                const auto eq = tokens[i].find('=');
                if (eq == std::string_view::npos) throw ParseError(where + "expected key=value");
                const auto key = tokens[i].substr(0, eq);
                const auto value = tokens[i].substr(eq + 1);
                if (key == "states") {
                    data.num_states = static_cast<std::size_t>(text::parse_int(value));
                    have_states = true;
                } else if (key == "actions") {
                    data.num_actions = static_cast<std::size_t>(text::parse_int(value));
                    have_actions = true;
                } else if (key == "source") {
                    data.source = parse_source(value);
                } else if (provenance) {
                    (*provenance)[std::string(key)] = std::string(value);
                }
            }
            if (!have_states || !have_actions)
                throw ParseError(where + "header must declare states and actions");
            have_header = true;
            continue;
        }
        if (!have_columns) {
            if (line != kColumns) throw ParseError(where + "unexpected column header");
            have_columns = true;
            continue;
        }
        const auto f = text::split(line, '\t');
        if (f.size() != 10) throw ParseError(where + "expected 10 tab-separated fields");
        try {
            TransitionRecord r;
            r.episode = static_cast<int>(text::parse_int(f[0]));
            r.step = static_cast<int>(text::parse_int(f[1]));
            r.state = static_cast<int>(text::parse_int(f[2]));
            r.action = static_cast<int>(text::parse_int(f[3]));
            r.reward = text::parse_double(f[4]);
            r.next_state = static_cast<int>(text::parse_int(f[5]));
            if (f[6] != "-") r.next_action = static_cast<int>(text::parse_int(f[6]));
            r.terminal = parse_flag(f[7]);
            r.timeout = parse_flag(f[8]);
            r.source = parse_source(f[9]);
            data.records.push_back(r);
        } catch (const ParseError& e) {
            throw ParseError(where + e.what());
        }
    }
    if (!have_header || !have_columns) throw ParseError("dataset: truncated header");
    try {
        data.validate();
    } catch (const ModelError& e) {
        throw ParseError(std::string("dataset: ") + e.what());
    }
    return data;
}

void save_dataset(const TransitionDataset& data, const std::string& path,
                  const std::map<std::string, std::string>& provenance) {
    text::write_file(path, format_dataset(data, provenance));
}

TransitionDataset load_dataset(const std::string& path,
                               std::map<std::string, std::string>* provenance) {
    return parse_dataset(text::read_file(path), provenance);
}

}  // namespace ilbrl
