#include "ilbrl/mdp_io.hpp"

#include "ilbrl/errors.hpp"
#include "ilbrl/text.hpp"

#include <string>
#include <vector>

namespace ilbrl {

namespace {

void append_row(std::string& out, const double* values, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += text::format_double(values[i]);
    }
    out += '\n';
}

// Iterates over meaningful lines (non-blank, non-comment).
class LineReader {
public:
    explicit LineReader(std::string_view contents) : rest_(contents) {}

    std::vector<std::string_view> next(const char* expecting) {
        while (!rest_.empty()) {
            const auto pos = rest_.find('\n');
            const auto line = rest_.substr(0, pos);
            rest_ = pos == std::string_view::npos ? std::string_view{} : rest_.substr(pos + 1);
            ++line_no_;
            auto tokens = text::split_ws(line);
            if (tokens.empty() || tokens.front().front() == '#') continue;
            return tokens;
        }
        throw ParseError(std::string("unexpected end of MDP file, expecting ") + expecting);
    }

    std::vector<std::string_view> keyword(std::string_view name, std::size_t values) {
        auto tokens = next(std::string(name).c_str());
        if (tokens.front() != name || (values != npos && tokens.size() != values + 1))
            throw ParseError("line " + std::to_string(line_no_) + ": expected '" + std::string(name) +
                             "'");
        tokens.erase(tokens.begin());
        return tokens;
    }

    std::vector<double> numbers(std::size_t count) {
        auto tokens = next("a row of numbers");
        if (tokens.size() != count)
            throw ParseError("line " + std::to_string(line_no_) + ": expected " +
                             std::to_string(count) + " values, got " + std::to_string(tokens.size()));
        std::vector<double> out;
        out.reserve(count);
        for (auto t : tokens) out.push_back(text::parse_double(t));
        return out;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::string_view rest_;
    int line_no_ = 0;
};

}  // namespace

std::string format_mdp(const TabularMdp& mdp) {
    const std::size_t S = mdp.num_states();
    const std::size_t A = mdp.num_actions();
    std::string out = "ilbrl-mdp 1\n";
    out += "states " + std::to_string(S) + "\n";
    out += "actions " + std::to_string(A) + "\n";
    out += "discount " + text::format_double(mdp.discount()) + "\n";
    out += "initial ";
    append_row(out, mdp.initial().data(), S);
    out += "rewards\n";
    for (std::size_t s = 0; s < S; ++s) {
        std::vector<double> row(A);
        for (std::size_t a = 0; a < A; ++a) row[a] = mdp.reward(s, a);
        append_row(out, row.data(), A);
    }
    out += "transitions\n";
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < A; ++a) append_row(out, mdp.transition(s, a).data(), S);
    return out;
}

TabularMdp parse_mdp(std::string_view contents) {
    LineReader reader(contents);
    const auto magic = reader.keyword("ilbrl-mdp", 1);
    if (magic[0] != "1") throw ParseError("unsupported MDP format version");
    const auto S = static_cast<std::size_t>(text::parse_int(reader.keyword("states", 1)[0]));
    const auto A = static_cast<std::size_t>(text::parse_int(reader.keyword("actions", 1)[0]));
    if (S == 0 || A == 0) throw ParseError("MDP dimensions must be positive");
    const double discount = text::parse_double(reader.keyword("discount", 1)[0]);
    const auto initial_tokens = reader.keyword("initial", S);
    Vector initial(static_cast<Eigen::Index>(S));
    for (std::size_t i = 0; i < S; ++i)
        initial(static_cast<Eigen::Index>(i)) = text::parse_double(initial_tokens[i]);
    reader.keyword("rewards", 0);
    Matrix rewards(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(A));
    for (std::size_t s = 0; s < S; ++s) {
        const auto row = reader.numbers(A);
        for (std::size_t a = 0; a < A; ++a)
            rewards(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = row[a];
    }
    reader.keyword("transitions", 0);
    std::vector<double> transitions;
    transitions.reserve(S * A * S);
    for (std::size_t i = 0; i < S * A; ++i) {
        const auto row = reader.numbers(S);
        transitions.insert(transitions.end(), row.begin(), row.end());
    }
    return TabularMdp(S, A, std::move(transitions), std::move(rewards), std::move(initial), discount);
}

void save_mdp(const TabularMdp& mdp, const std::string& path) {
    text::write_file(path, format_mdp(mdp));
}

TabularMdp load_mdp(const std::string& path) { return parse_mdp(text::read_file(path)); }

}  // namespace ilbrl
