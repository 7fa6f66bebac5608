#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cotc/types.hpp"

namespace cotc {

// Sample records: one JSON object per line with exactly the fields
// id, question, image_ref, answer, source. image_ref is null when absent.
std::vector<Sample> read_samples(const std::filesystem::path& path);
void write_samples(const std::vector<Sample>& samples, const std::filesystem::path& path);

// Trajectory records: {sample_id, model_id, seed, text, length_tokens}.
void write_trajectories(const std::vector<TrajectorySet>& sets,
                        const std::filesystem::path& path);
std::map<std::string, TrajectorySet> read_trajectories(const std::filesystem::path& path);

// Benchmark adapters: ingest a benchmark's published record schema into
// Sample. Supported adapters: "native" (our sample schema), "mathvista",
// "scienceqa". Each is thin and fixture-tested on small excerpts.
std::vector<Sample> load_benchmark(const std::filesystem::path& path,
                                   const std::string& adapter);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// Content hash of a file on disk (FNV-1a 64, hex); used for determinism
// checks and manifests.
std::string file_hash_hex(const std::filesystem::path& path);

}  // namespace cotc
