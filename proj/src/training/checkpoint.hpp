#pragma once

#include <string>

#include "network/model.hpp"
#include "training/adam.hpp"

namespace secor::train {

struct CheckpointExtra {
    long long step = 0;
    long long epoch = 0;
};

// Container with every model parameter, optional optimizer moments, the
// network config (and its hash) and the training cursor. Loading verifies
// per-tensor checksums and the config hash.
void save_checkpoint(const std::string& path, const net::CorrectionNet& model, const Adam* opt,
                     const CheckpointExtra& extra);

net::NetworkConfig checkpoint_config(const std::string& path);

void load_checkpoint(const std::string& path, net::CorrectionNet& model, Adam* opt,
                     CheckpointExtra* extra, bool force = false);

} // namespace secor::train
