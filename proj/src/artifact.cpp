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

#include "esb/artifact.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "esb/binary_io.hpp"
#include "esb/hash.hpp"

namespace esb {

namespace {

constexpr std::size_t kPayloadOffset = 8 + sizeof(std::uint64_t);  // magic + version

ModelArtifact finish(ByteWriter& w, std::uint64_t version, ModelKind kind, std::uint64_t pad_to) {
  const auto payload = std::span<const std::uint8_t>(w.bytes()).subspan(kPayloadOffset);
  ModelArtifact a;
  a.checksum = fnv1a64(payload);
  w.put<std::uint64_t>(a.checksum);
  if (w.size() < pad_to) w.bytes().resize(pad_to, 0);
  a.version = version;
  a.kind = kind;
  a.pad_to = pad_to;
  a.bytes = w.take();
  return a;
}

void begin(ByteWriter& w, std::uint64_t version, ModelKind kind,
           std::span<const std::uint32_t> dims) {
  w.put_raw({reinterpret_cast<const std::uint8_t*>(kModelMagic.data()), kModelMagic.size()});
  w.put<std::uint64_t>(version);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(kind));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) w.put<std::uint32_t>(d);
}

struct Decoded {
  ModelArtifact header;
  std::vector<std::uint32_t> dims;
  std::vector<float> params;
};

Decoded decode(std::span<const std::uint8_t> bytes, bool with_params) {
  ByteReader r(bytes);
  const auto magic = r.get_raw(kModelMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kModelMagic.begin(),
                  [](std::uint8_t a, char b) { return a == static_cast<std::uint8_t>(b); }))
    throw CorruptionError("not an ESBMDL1 artifact");
  Decoded d;
  d.header.version = r.get<std::uint64_t>();
  const auto kind = r.get<std::uint32_t>();
  if (kind != 1 && kind != 2) throw CorruptionError("unknown model kind " + std::to_string(kind));
  d.header.kind = static_cast<ModelKind>(kind);
  const auto dim_count = r.get<std::uint32_t>();
  if (dim_count > 64) throw CorruptionError("implausible dimension count");
  d.dims.resize(dim_count);
  for (auto& dim : d.dims) dim = r.get<std::uint32_t>();
  const auto param_count = r.get<std::uint64_t>();
  if (param_count > r.remaining() / sizeof(float)) throw CorruptionError("truncated parameters");
  if (with_params) {
    d.params.resize(param_count);
    r.get_floats(d.params);
  } else {
    r.get_raw(param_count * sizeof(float));
  }
  const std::size_t payload_end = r.position();
  const auto stored = r.get<std::uint64_t>();
  const auto computed = fnv1a64(bytes.subspan(kPayloadOffset, payload_end - kPayloadOffset));
  if (stored != computed) throw CorruptionError("artifact checksum mismatch");
  const auto padding = bytes.subspan(r.position());
  if (std::any_of(padding.begin(), padding.end(), [](std::uint8_t b) { return b != 0; }))
    throw CorruptionError("non-zero bytes in artifact padding");
  d.header.checksum = stored;
  d.header.pad_to = padding.empty() ? 0 : bytes.size();
  return d;
}

}  // namespace

const char* model_kind_name(ModelKind kind) {
  return kind == ModelKind::Classifier ? "classifier" : "preference";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "classifier") return ModelKind::Classifier;
  if (name == "preference") return ModelKind::Preference;
  throw ConfigError("kind", "unknown model kind '" + std::string(name) + "'");
}

ModelArtifact serialize(const TextClassifier& model, std::uint64_t version, std::uint64_t pad_to) {
  const auto& s = model.shape();
  const std::uint32_t dims[] = {s.buckets, s.dim, s.categories, s.ngram_order};
  ByteWriter w;
  begin(w, version, ModelKind::Classifier, dims);
  w.put<std::uint64_t>(model.embeddings().size() + model.output_weights().size());
  w.put_floats(model.embeddings());
  w.put_floats(model.output_weights());
  return finish(w, version, ModelKind::Classifier, pad_to);
}

ModelArtifact serialize(const PreferenceNet& model, std::uint64_t version, std::uint64_t pad_to) {
  ByteWriter w;
  begin(w, version, ModelKind::Preference, model.layer_sizes());
  w.put<std::uint64_t>(model.parameter_count());
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    w.put_floats(model.weights(l));
    w.put_floats(model.biases(l));
  }
  return finish(w, version, ModelKind::Preference, pad_to);
}

ModelArtifact inspect_artifact(std::span<const std::uint8_t> bytes) {
  auto d = decode(bytes, false);
  d.header.bytes.assign(bytes.begin(), bytes.end());
  return d.header;
}

TextClassifier deserialize_classifier(std::span<const std::uint8_t> bytes) {
  auto d = decode(bytes, true);
  if (d.header.kind != ModelKind::Classifier) throw CorruptionError("artifact is not a classifier");
  if (d.dims.size() != 4) throw CorruptionError("classifier header needs 4 dimensions");
  ClassifierShape shape{d.dims[0], d.dims[1], d.dims[2], d.dims[3]};
  TextClassifier model;
  try {
    model = TextClassifier(shape);
  } catch (const ShapeError& e) {
    throw CorruptionError(std::string("bad classifier header: ") + e.what());
  }
  if (d.params.size() != model.embeddings().size() + model.output_weights().size())
    throw CorruptionError("classifier parameter count does not match its dimensions");
  auto mid = d.params.begin() + static_cast<std::ptrdiff_t>(model.embeddings().size());
  std::copy(d.params.begin(), mid, model.embeddings().begin());
  std::copy(mid, d.params.end(), model.output_weights().begin());
  return model;
}

PreferenceNet deserialize_preference(std::span<const std::uint8_t> bytes) {
  auto d = decode(bytes, true);
  if (d.header.kind != ModelKind::Preference) throw CorruptionError("artifact is not a preference net");
  PreferenceNet net;
  try {
    net = PreferenceNet(d.dims);
  } catch (const ShapeError& e) {
    throw CorruptionError(std::string("bad preference header: ") + e.what());
  }
  if (d.params.size() != net.parameter_count())
    throw CorruptionError("preference parameter count does not match its dimensions");
  auto it = d.params.begin();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    auto& w = net.weights(l);
    std::copy(it, it + static_cast<std::ptrdiff_t>(w.size()), w.begin());
    it += static_cast<std::ptrdiff_t>(w.size());
    auto& b = net.biases(l);
    std::copy(it, it + static_cast<std::ptrdiff_t>(b.size()), b.begin());
    it += static_cast<std::ptrdiff_t>(b.size());
  }
  return net;
}

void write_artifact(const std::filesystem::path& path, const ModelArtifact& artifact) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(artifact.bytes.data()),
            static_cast<std::streamsize>(artifact.bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace esb
