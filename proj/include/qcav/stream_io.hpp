#pragma once

#include <filesystem>

#include "qcav/emitter.hpp"

namespace qcav {

// Binary time-tag file, little-endian:
//   magic "QPTS", u32 version, u64 duration_ps, u64 seed, u64 count,
//   then count records of (u64 tag_ps, u8 channel).
void write_stream(const std::filesystem::path& path, const PhotonStream& s);
PhotonStream read_stream(const std::filesystem::path& path);

// One JSON object per line: {"t_ps": ..., "channel": "zpl"|"sideband"|"background"}.
void write_stream_ndjson(const std::filesystem::path& path, const PhotonStream& s);

}
