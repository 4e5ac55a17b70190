#ifndef OPSEL_CHECKPOINT_HPP
#define OPSEL_CHECKPOINT_HPP

#include <string>

#include "opsel/network.hpp"

namespace opsel {

/**
 * Network checkpoint file: a small text header (format version, architecture,
 * dimensions, array directory) followed by the raw little-endian doubles of
 * every array in directory order. Round-trips bit-exactly.
 */
void save_checkpoint(const std::string& path, const NetworkConfig& cfg, const Parameters& params);

struct Checkpoint {
    NetworkConfig cfg;
    Parameters params;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace opsel

#endif
