#include "ilbrl/support_reward.hpp"

#include "ilbrl/errors.hpp"
#include "ilbrl/parallel.hpp"
#include "ilbrl/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace ilbrl {

void FeatureDataset::add(std::span<const double> x, bool is_expert) {
    if (x.size() != dimension)
        throw InvalidArgument("feature vector has dimension " + std::to_string(x.size()) +
                              ", expected " + std::to_string(dimension));
    coords.insert(coords.end(), x.begin(), x.end());
    expert.push_back(is_expert);
}

void FeatureDataset::validate() const {
    if (dimension == 0) throw ModelError("feature dimension must be positive");
    if (coords.size() != dimension * expert.size())
        throw ModelError("feature coordinates do not match the number of points");
    for (double c : coords)
        if (!std::isfinite(c)) throw ModelError("feature coordinates must be finite");
}

FeatureDataset FeatureDataset::experts() const {
    FeatureDataset out{dimension, {}, {}};
    for (std::size_t i = 0; i < size(); ++i)
        if (expert[i]) out.add(point(i), true);
    return out;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        sum += d * d;
    }
    return sum;
}

void require_experts(const FeatureDataset& experts) {
    if (experts.size() == 0) throw InvalidArgument("the expert set is empty");
}

}  // namespace

double euclidean(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("euclidean: dimension mismatch");
    return std::sqrt(squared_distance(a, b));
}

double nearest_distance(std::span<const double> x, const FeatureDataset& experts) {
    require_experts(experts);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < experts.size(); ++i)
        best = std::min(best, euclidean(x, experts.point(i)));
    return best;
}

struct KdTree::Impl {
    struct Node {
        std::size_t point;
        std::size_t axis;
        int left = -1;
        int right = -1;
    };
    FeatureDataset points;
    std::vector<Node> nodes;
    int root = -1;

    int build(std::vector<std::size_t>& idx, std::size_t begin, std::size_t end, std::size_t depth) {
        if (begin >= end) return -1;
        const std::size_t axis = depth % points.dimension;
        const std::size_t mid = begin + (end - begin) / 2;
        std::nth_element(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                         idx.begin() + static_cast<std::ptrdiff_t>(mid),
                         idx.begin() + static_cast<std::ptrdiff_t>(end),
                         [&](std::size_t a, std::size_t b) {
                             const double pa = points.point(a)[axis];
                             const double pb = points.point(b)[axis];
                             return pa < pb || (pa == pb && a < b);
                         });
        const int id = static_cast<int>(nodes.size());
        nodes.push_back({idx[mid], axis});
        const int left = build(idx, begin, mid, depth + 1);
        const int right = build(idx, mid + 1, end, depth + 1);
        nodes[static_cast<std::size_t>(id)].left = left;
        nodes[static_cast<std::size_t>(id)].right = right;
        return id;
    }

    void search(int id, std::span<const double> x, double& best_sq) const {
        if (id < 0) return;
        const Node& node = nodes[static_cast<std::size_t>(id)];
        const auto p = points.point(node.point);
        best_sq = std::min(best_sq, squared_distance(x, p));
        const double gap = x[node.axis] - p[node.axis];
        const int near = gap < 0.0 ? node.left : node.right;
        const int far = gap < 0.0 ? node.right : node.left;
        search(near, x, best_sq);
        // Every point beyond the plane is at least |gap| away along this axis.
        if (gap * gap <= best_sq) search(far, x, best_sq);
    }
};

KdTree::KdTree(const FeatureDataset& points) : impl_(std::make_unique<Impl>()) {
    points.validate();
    require_experts(points);
    impl_->points = points;
    std::vector<std::size_t> idx(points.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    impl_->nodes.reserve(points.size());
    impl_->root = impl_->build(idx, 0, idx.size(), 0);
}

KdTree::~KdTree() = default;
KdTree::KdTree(KdTree&&) noexcept = default;
KdTree& KdTree::operator=(KdTree&&) noexcept = default;

double KdTree::nearest_distance(std::span<const double> x) const {
    if (x.size() != impl_->points.dimension) throw InvalidArgument("KdTree: dimension mismatch");
    double best_sq = std::numeric_limits<double>::infinity();
    impl_->search(impl_->root, x, best_sq);
    return std::sqrt(best_sq);
}

double compute_dmax(const FeatureDataset& data) {
    data.validate();
    const auto experts = data.experts();
    require_experts(experts);
    double d_max = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        d_max = std::max(d_max, nearest_distance(data.point(i), experts));
    return d_max;
}

double support_reward_from_distance(double distance, double d_max) {
    if (!(d_max >= 0.0)) throw InvalidArgument("d_max must be non-negative");
    if (d_max == 0.0) return distance == 0.0 ? 1.0 : 0.0;
    return std::clamp(1.0 - std::sqrt(distance) / std::sqrt(d_max), 0.0, 1.0);
}

double soft_support_reward(std::span<const double> x, const FeatureDataset& experts, double d_max) {
    return support_reward_from_distance(nearest_distance(x, experts), d_max);
}

std::vector<double> label_dataset(const FeatureDataset& data, NeighbourSearch search,
                                  std::size_t workers) {
    data.validate();
    const auto experts = data.experts();
    require_experts(experts);
    std::vector<double> distance(data.size());
    if (search == NeighbourSearch::KdTree) {
        const KdTree tree(experts);
        parallel_for(data.size(), workers,
                     [&](std::size_t i) { distance[i] = tree.nearest_distance(data.point(i)); });
    } else {
        parallel_for(data.size(), workers,
                     [&](std::size_t i) { distance[i] = nearest_distance(data.point(i), experts); });
    }
    const double d_max =
        distance.empty() ? 0.0 : *std::max_element(distance.begin(), distance.end());
    std::vector<double> rewards(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        rewards[i] = support_reward_from_distance(distance[i], d_max);
    return rewards;
}

std::string format_features(const FeatureDataset& data) {
    data.validate();
    std::ostringstream out;
    out << "# ilbrl-features 1 dimension=" << data.dimension << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << (data.expert[i] ? 1 : 0);
        for (double c : data.point(i)) out << ' ' << text::format_double(c);
        out << '\n';
    }
    return out.str();
}

FeatureDataset parse_features(std::string_view contents) {
    FeatureDataset data;
    bool have_header = false;
    std::size_t line_no = 0;
    std::vector<double> x;
    while (!contents.empty()) {
        const auto eol = contents.find('\n');
        const std::string_view line = contents.substr(0, eol);
        contents = eol == std::string_view::npos ? std::string_view{} : contents.substr(eol + 1);
        ++line_no;
        const auto tokens = text::split_ws(line);
        if (tokens.empty()) continue;
        const std::string where = "feature line " + std::to_string(line_no) + ": ";
        if (!have_header) {
            if (tokens.size() != 4 || tokens[0] != "#" || tokens[1] != "ilbrl-features" ||
                tokens[2] != "1" || tokens[3].substr(0, 10) != "dimension=")
                throw ParseError(where + "missing '# ilbrl-features 1 dimension=<d>' header");
            const auto d = text::parse_int(tokens[3].substr(10));
            if (d < 1) throw ParseError(where + "dimension must be positive");
            data.dimension = static_cast<std::size_t>(d);
            have_header = true;
            continue;
        }
        if (tokens[0].front() == '#') continue;
        if (tokens.size() != data.dimension + 1)
            throw ParseError(where + "expected a flag and " + std::to_string(data.dimension) +
                             " coordinates");
        if (tokens[0] != "0" && tokens[0] != "1") throw ParseError(where + "flag must be 0 or 1");
        x.clear();
        for (std::size_t k = 1; k < tokens.size(); ++k) x.push_back(text::parse_double(tokens[k]));
        data.add(x, tokens[0] == "1");
    }
    if (!have_header) throw ParseError("feature file has no header");
    data.validate();
    return data;
}

std::string format_rewards(std::span<const double> rewards) {
    std::string out;
    for (double r : rewards) {
        out += text::format_double(r);
        out += '\n';
    }
    return out;
}

}  // namespace ilbrl
