// Copyright 2026 The esbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "esb/preference_net.hpp"
#include "esb/text_classifier.hpp"

namespace esb {

enum class ModelKind : std::uint32_t { Classifier = 1, Preference = 2 };

const char* model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

inline constexpr std::string_view kModelMagic{"ESBMDL1\0", 8};

/// A serialized, versioned model.
///
/// Layout (little-endian): magic `ESBMDL1\0`, u64 version, u32 kind,
/// u32 dimension count, u32 dimensions..., u64 parameter count, f32
/// parameters, u64 checksum, then zero padding up to `pad_to`. The checksum
/// is FNV-1a 64 over the payload: kind, dimensions, parameter count and
/// parameters. Magic, version and padding are outside it.
struct ModelArtifact {
  std::uint64_t version = 0;
  ModelKind kind = ModelKind::Classifier;
  std::vector<std::uint8_t> bytes;
  std::uint64_t pad_to = 0;
  std::uint64_t checksum = 0;
};

ModelArtifact serialize(const TextClassifier& model, std::uint64_t version, std::uint64_t pad_to = 0);
ModelArtifact serialize(const PreferenceNet& model, std::uint64_t version, std::uint64_t pad_to = 0);

/// Validates magic, checksum and padding without decoding parameters.
/// Throws CorruptionError.
ModelArtifact inspect_artifact(std::span<const std::uint8_t> bytes);

TextClassifier deserialize_classifier(std::span<const std::uint8_t> bytes);
PreferenceNet deserialize_preference(std::span<const std::uint8_t> bytes);

void write_artifact(const std::filesystem::path& path, const ModelArtifact& artifact);
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace esb
