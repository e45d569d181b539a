#pragma once

#include "core/config.hpp"

namespace jumper {

// Binary checkpoint: magic, format version, a JSON manifest (config
// snapshot, schema, vocabulary, parameter name/shape table) and the raw
// parameter buffers as little-endian float32 in manifest order.
struct Checkpoint {
  RunConfig config;
  SlotSchema schema;
  Vocabulary vocab;
  ParamStore params;
};

void save_checkpoint(const std::string& path, const RunConfig& cfg,
                     const SlotSchema& schema, const Vocabulary& vocab,
                     const ParamStore& params);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace jumper
