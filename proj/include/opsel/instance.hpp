#ifndef OPSEL_INSTANCE_HPP
#define OPSEL_INSTANCE_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace opsel {

struct NodeRecord {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
    int demand = 0;
};

class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

/**
 * Static CVRP data: depot (node 0), customers (1..n), vehicle capacity and a
 * precomputed unrounded Euclidean distance matrix. Immutable after
 * construction, so a single Instance can be shared across threads.
 */
class Instance {
public:
    static Instance from_nodes(std::string name, std::vector<NodeRecord> nodes, int capacity);

    const std::string& name() const { return name_; }
    int capacity() const { return capacity_; }
    int n_customers() const { return static_cast<int>(nodes_.size()) - 1; }
    int n_nodes() const { return static_cast<int>(nodes_.size()); }
    const NodeRecord& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    const std::vector<NodeRecord>& nodes() const { return nodes_; }

    double dist(int i, int j) const { return dist_[static_cast<std::size_t>(i) * nodes_.size() + static_cast<std::size_t>(j)]; }
    double dist_depot(int i) const { return dist(0, i); }
    // Largest pairwise node distance; frozen here so learned models see the
    // same normalization on every solution of the instance.
    double max_dist() const { return max_dist_; }

    double min_x() const { return min_x_; }
    double max_x() const { return max_x_; }
    double min_y() const { return min_y_; }
    double max_y() const { return max_y_; }

private:
    Instance() = default;

    std::string name_;
    int capacity_ = 0;
    std::vector<NodeRecord> nodes_;
    std::vector<double> dist_;
    double max_dist_ = 0.0;
    double min_x_ = 0.0, max_x_ = 0.0, min_y_ = 0.0, max_y_ = 0.0;
};

// Parses the classic Solomon text layout (instance name, VEHICLE section with
// a capacity, CUSTOMER table with 7 numeric columns). Time-window columns are
// accepted and discarded; only id, coordinates and demand are kept.
Instance parse_solomon(const std::string& text);
Instance load_solomon_file(const std::string& path);
std::string serialize_solomon(const Instance& inst);

// Keeps customers 1..n and rescales capacity proportionally to the kept share
// of customers (round to nearest).
Instance truncate_instance(const Instance& inst, int n);

}  // namespace opsel

#endif
