#include "opsel/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace opsel {

namespace {
constexpr const char* kMagic = "opsel-net v1";
}

void save_checkpoint(const std::string& path, const NetworkConfig& cfg, const Parameters& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << kMagic << "\n";
    out << "arch " << arch_to_string(cfg.arch) << "\n";
    out << "node_features " << cfg.node_features << "\n";
    out << "node_count " << cfg.node_count << "\n";
    out << "global_features " << cfg.global_features << "\n";
    out << "hidden";
    for (int h : cfg.hidden) out << ' ' << h;
    out << "\n";
    out << "gat_layers " << cfg.gat_layers << "\n";
    out << "gat_embed " << cfg.gat_embed << "\n";
    out << "outputs " << cfg.outputs << "\n";
    out << "leaky_slope " << cfg.leaky_slope << "\n";
    out << "arrays " << params.arrays.size() << "\n";
    for (const auto& a : params.arrays) out << "array " << a.name << ' ' << a.value.rows() << ' ' << a.value.cols() << "\n";
    out << "data\n";
    for (const auto& a : params.arrays)
        out.write(reinterpret_cast<const char*>(a.value.data()),
                  static_cast<std::streamsize>(a.value.size() * sizeof(double)));
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw std::runtime_error("not a network checkpoint: " + path);

    Checkpoint ck;
    std::size_t n_arrays = 0;
    std::vector<std::tuple<std::string, int, int>> directory;
    while (std::getline(in, line)) {
        if (line == "data") break;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "arch") {
            std::string v;
            ss >> v;
            ck.cfg.arch = arch_from_string(v);
        } else if (key == "node_features") {
            ss >> ck.cfg.node_features;
        } else if (key == "node_count") {
            ss >> ck.cfg.node_count;
        } else if (key == "global_features") {
            ss >> ck.cfg.global_features;
        } else if (key == "hidden") {
            ck.cfg.hidden.clear();
            int h;
            while (ss >> h) ck.cfg.hidden.push_back(h);
        } else if (key == "gat_layers") {
            ss >> ck.cfg.gat_layers;
        } else if (key == "gat_embed") {
            ss >> ck.cfg.gat_embed;
        } else if (key == "outputs") {
            ss >> ck.cfg.outputs;
        } else if (key == "leaky_slope") {
            ss >> ck.cfg.leaky_slope;
        } else if (key == "arrays") {
            ss >> n_arrays;
        } else if (key == "array") {
            std::string name;
            int r = 0, c = 0;
            ss >> name >> r >> c;
            if (name.empty() || r < 1 || c < 1)
                throw std::runtime_error("malformed array header in " + path + ": " + line);
            directory.emplace_back(name, r, c);
        } else {
            throw std::runtime_error("unknown checkpoint header line in " + path + ": " + line);
        }
        if (ss.fail() && key != "hidden") throw std::runtime_error("malformed checkpoint header in " + path + ": " + line);
    }
    if (directory.size() != n_arrays)
        throw std::runtime_error("checkpoint directory lists " + std::to_string(directory.size()) +
                                 " arrays, header says " + std::to_string(n_arrays));
    for (const auto& [name, r, c] : directory) {
        Matrix m(r, c);
        in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
        if (in.gcount() != static_cast<std::streamsize>(m.size() * sizeof(double)))
            throw std::runtime_error("checkpoint truncated while reading array " + name);
        ck.params.arrays.push_back({name, std::move(m)});
    }
    return ck;
}

}  // namespace opsel
