#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "ssid/pod.hpp"
#include "ssid/snapshots.hpp"
#include "ssid/stable_param.hpp"

namespace ssid {

/// A serialized model: the assembled (A, B) plus, for stable-parameterized
/// models, the raw factors so stability is re-derivable from the file.
struct ModelFile {
    LinearModel model;
    std::optional<StableParams> params;
};

/// Shortest round-trip decimal representation (locale independent).
std::string format_double(double v);
double parse_double(const std::string& token);

/// Dispatches on extension: ".ssb" writes the checksummed binary format,
/// anything else the '#'-headed text format.
void write_snapshots(const SnapshotSet& data, const std::filesystem::path& path);
void write_snapshots_text(const SnapshotSet& data, const std::filesystem::path& path);
void write_snapshots_binary(const SnapshotSet& data, const std::filesystem::path& path);

/// Sniffs the magic bytes, accepts either format.
SnapshotSet read_snapshots(const std::filesystem::path& path);

void write_model(const ModelFile& mf, const std::filesystem::path& path);
ModelFile read_model(const std::filesystem::path& path);

void write_basis(const PodBasis& basis, const std::filesystem::path& path);
PodBasis read_basis(const std::filesystem::path& path);

} // namespace ssid
