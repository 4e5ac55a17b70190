#include "opsel/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace opsel {

ParseError::ParseError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

Instance Instance::from_nodes(std::string name, std::vector<NodeRecord> nodes, int capacity) {
    if (nodes.size() < 2) throw std::invalid_argument("instance needs a depot and at least one customer");
    if (capacity <= 0) throw std::invalid_argument("capacity must be positive");
    std::sort(nodes.begin(), nodes.end(), [](const NodeRecord& a, const NodeRecord& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id != static_cast<int>(i))
            throw std::invalid_argument("node ids must be contiguous from 0, missing or duplicate id " + std::to_string(i));
        if (nodes[i].demand < 0) throw std::invalid_argument("negative demand at node " + std::to_string(nodes[i].id));
    }
    if (nodes[0].demand != 0) throw std::invalid_argument("depot demand must be zero");

    Instance inst;
    inst.name_ = std::move(name);
    inst.capacity_ = capacity;
    inst.nodes_ = std::move(nodes);

    const std::size_t m = inst.nodes_.size();
    inst.dist_.assign(m * m, 0.0);
    inst.max_dist_ = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double dx = inst.nodes_[i].x - inst.nodes_[j].x;
            const double dy = inst.nodes_[i].y - inst.nodes_[j].y;
            const double d = std::sqrt(dx * dx + dy * dy);
            inst.dist_[i * m + j] = d;
            inst.dist_[j * m + i] = d;
            inst.max_dist_ = std::max(inst.max_dist_, d);
        }
    }
    inst.min_x_ = inst.max_x_ = inst.nodes_[0].x;
    inst.min_y_ = inst.max_y_ = inst.nodes_[0].y;
    for (const NodeRecord& nd : inst.nodes_) {
        inst.min_x_ = std::min(inst.min_x_, nd.x);
        inst.max_x_ = std::max(inst.max_x_, nd.x);
        inst.min_y_ = std::min(inst.min_y_, nd.y);
        inst.max_y_ = std::max(inst.max_y_, nd.y);
    }
    return inst;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

double parse_double(const std::string& tok, int line_no, const char* what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        throw ParseError(line_no, std::string("expected a number for ") + what + ", got '" + tok + "'");
    }
    if (used != tok.size())
        throw ParseError(line_no, std::string("trailing characters in ") + what + " '" + tok + "'");
    return v;
}

int parse_int(const std::string& tok, int line_no, const char* what) {
    const double v = parse_double(tok, line_no, what);
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9)
        throw ParseError(line_no, std::string(what) + " must be an integer, got '" + tok + "'");
    return static_cast<int>(r);
}

bool contains_word(const std::string& line, const std::string& word) {
    const auto fields = split_fields(line);
    return std::find(fields.begin(), fields.end(), word) != fields.end();
}

}  // namespace

Instance parse_solomon(const std::string& text) {
    std::vector<std::string> lines;
    {
        std::istringstream ss(text);
        std::string line;
        while (std::getline(ss, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines.push_back(line);
        }
    }

    std::size_t i = 0;
    auto skip_blank = [&]() {
        while (i < lines.size() && split_fields(lines[i]).empty()) ++i;
    };

    skip_blank();
    if (i >= lines.size()) throw ParseError(1, "empty file, expected instance name");
    std::string name = lines[i];
    while (!name.empty() && (name.back() == ' ' || name.back() == '\t')) name.pop_back();
    ++i;

    skip_blank();
    if (i >= lines.size() || !contains_word(lines[i], "VEHICLE"))
        throw ParseError(static_cast<int>(i) + 1, "expected VEHICLE section");
    ++i;
    skip_blank();
    if (i >= lines.size() || !contains_word(lines[i], "CAPACITY"))
        throw ParseError(static_cast<int>(i) + 1, "expected NUMBER/CAPACITY header");
    ++i;
    skip_blank();
    if (i >= lines.size()) throw ParseError(static_cast<int>(i) + 1, "expected vehicle count and capacity");
    {
        const auto f = split_fields(lines[i]);
        if (f.size() < 2) throw ParseError(static_cast<int>(i) + 1, "expected two values: vehicle count and capacity");
    }
    const int capacity = parse_int(split_fields(lines[i])[1], static_cast<int>(i) + 1, "capacity");
    ++i;

    skip_blank();
    if (i >= lines.size() || !contains_word(lines[i], "CUSTOMER"))
        throw ParseError(static_cast<int>(i) + 1, "expected CUSTOMER section");
    ++i;
    skip_blank();
    if (i >= lines.size() || !contains_word(lines[i], "XCOORD."))
        throw ParseError(static_cast<int>(i) + 1, "expected customer table header");
    ++i;

    std::vector<NodeRecord> nodes;
    bool saw_depot = false;
    for (; i < lines.size(); ++i) {
        const auto f = split_fields(lines[i]);
        if (f.empty()) continue;
        const int line_no = static_cast<int>(i) + 1;
        if (f.size() < 7)
            throw ParseError(line_no, "customer row has " + std::to_string(f.size()) + " fields, expected 7");
        NodeRecord nd;
        nd.id = parse_int(f[0], line_no, "customer id");
        nd.x = parse_double(f[1], line_no, "x coordinate");
        nd.y = parse_double(f[2], line_no, "y coordinate");
        nd.demand = parse_int(f[3], line_no, "demand");
        // Columns 4..6 are time-window data; validated as numeric, then dropped.
        parse_double(f[4], line_no, "ready time");
        parse_double(f[5], line_no, "due date");
        parse_double(f[6], line_no, "service time");
        if (nd.id == 0) saw_depot = true;
        nodes.push_back(nd);
    }
    if (nodes.empty()) throw ParseError(static_cast<int>(lines.size()), "no customer rows found");
    if (!saw_depot) throw ParseError(static_cast<int>(lines.size()), "missing depot row (id 0)");

    try {
        return Instance::from_nodes(std::move(name), std::move(nodes), capacity);
    } catch (const std::invalid_argument& e) {
        throw ParseError(static_cast<int>(lines.size()), e.what());
    }
}

Instance load_solomon_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_solomon(buf.str());
}

std::string serialize_solomon(const Instance& inst) {
    std::ostringstream out;
    out << inst.name() << "\n\n";
    out << "VEHICLE\n";
    out << "NUMBER     CAPACITY\n";
    char line[256];
    std::snprintf(line, sizeof(line), "  %d         %d\n\n", 25, inst.capacity());
    out << line;
    out << "CUSTOMER\n";
    out << "CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE TIME\n\n";
    for (const NodeRecord& nd : inst.nodes()) {
        std::snprintf(line, sizeof(line), "%5d %10.17g %10.17g %7d %7d %7d %7d\n",
                      nd.id, nd.x, nd.y, nd.demand, 0, 0, 0);
        out << line;
    }
    return out.str();
}

Instance truncate_instance(const Instance& inst, int n) {
    if (n < 1 || n > inst.n_customers())
        throw std::out_of_range("truncation size " + std::to_string(n) + " outside [1, " +
                                std::to_string(inst.n_customers()) + "]");
    std::vector<NodeRecord> nodes(inst.nodes().begin(), inst.nodes().begin() + n + 1);
    const double share = static_cast<double>(n) / static_cast<double>(inst.n_customers());
    int cap = static_cast<int>(std::llround(inst.capacity() * share));
    // Never scale below the largest kept demand; a vehicle that cannot carry
    // some customer makes the instance unsolvable.
    for (int i = 1; i <= n; ++i) cap = std::max(cap, nodes[static_cast<std::size_t>(i)].demand);
    return Instance::from_nodes(inst.name(), std::move(nodes), std::max(cap, 1));
}

}  // namespace opsel
