#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "vscnn/model.hpp"

namespace vscnn {

// Checkpoint file: 8-byte magic, u64 header length, JSON header (stage, seed,
// config hash, model dims, named block table), then the raw little-endian
// doubles of every parameter block in table order.

inline constexpr char kCheckpointMagic[8] = {'V', 'S', 'C', 'N', 'N', 'C', 'K', '1'};

struct CheckpointMeta {
    std::string stage;
    std::uint64_t seed = 0;
    std::string config_hash;
};

inline void save_checkpoint(const std::filesystem::path& path, ModelState& model,
                            const CheckpointMeta& meta) {
    nlohmann::json header;
    header["format"] = "vscnn-checkpoint";
    header["version"] = 1;
    header["stage"] = meta.stage.empty() ? model.stage : meta.stage;
    header["seed"] = meta.seed;
    header["config_hash"] = meta.config_hash;
    header["dims"] = to_json(model.dims);

    auto blocks = model.params();
    nlohmann::json table = nlohmann::json::array();
    for (const auto& b : blocks)
        table.push_back({{"name", b.name}, {"size", b.value->size()}});
    header["blocks"] = table;

    const std::string header_str = header.dump();
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write checkpoint: " + tmp.string());
        out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
        const std::uint64_t len = header_str.size();
        out.write(reinterpret_cast<const char*>(&len), sizeof(len));
        out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
        for (const auto& b : blocks)
            out.write(reinterpret_cast<const char*>(b.value->data()),
                      static_cast<std::streamsize>(b.value->size() * sizeof(double)));
        if (!out) throw std::runtime_error("checkpoint write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);  // atomic publish
}

struct LoadedCheckpoint {
    ModelState model;
    CheckpointMeta meta;
};

inline LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path.string());

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw std::runtime_error("not a vscnn checkpoint: " + path.string());

    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string header_str(len, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(len));
    if (!in) throw std::runtime_error("truncated checkpoint header: " + path.string());

    const auto header = nlohmann::json::parse(header_str);
    LoadedCheckpoint result{ModelState(model_dims_from_json(header.at("dims"))), {}};
    result.meta.stage = header.at("stage").get<std::string>();
    result.meta.seed = header.at("seed").get<std::uint64_t>();
    result.meta.config_hash = header.at("config_hash").get<std::string>();
    result.model.stage = result.meta.stage;

    auto blocks = result.model.params();
    const auto& table = header.at("blocks");
    if (table.size() != blocks.size())
        throw std::runtime_error("checkpoint block table mismatch: " + path.string());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& entry = table.at(i);
        if (entry.at("name").get<std::string>() != blocks[i].name ||
            entry.at("size").get<std::size_t>() != blocks[i].value->size())
            throw std::runtime_error("checkpoint block '" + blocks[i].name + "' mismatch");
        in.read(reinterpret_cast<char*>(blocks[i].value->data()),
                static_cast<std::streamsize>(blocks[i].value->size() * sizeof(double)));
    }
    if (!in) throw std::runtime_error("truncated checkpoint data: " + path.string());
    return result;
}

}  // namespace vscnn
