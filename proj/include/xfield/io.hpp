#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xfield/engine.hpp"
#include "xfield/eval.hpp"
#include "xfield/externalfield.hpp"
#include "xfield/lattice.hpp"
#include "xfield/pathsampler.hpp"
#include "xfield/phantom.hpp"
#include "xfield/potts.hpp"
#include "xfield/sequential.hpp"

namespace xfield::io {

namespace fs = std::filesystem;

inline constexpr const char* kVolumeMagic = "XFVOL1";

enum class ElementType { UInt8, Float64 };

std::size_t element_size(ElementType t);

// Volume file layout: one line of JSON header, '\n', then the raw
// little-endian payload of n * planes elements in site order, plane-major.
struct VolumeHeader {
  std::string magic = kVolumeMagic;
  LatticeSpec lattice;
  ElementType type = ElementType::Float64;
  std::size_t planes = 1;
  int k = 0;  // label count for label volumes, 0 otherwise
  std::string endianness = "little";
  std::uint32_t checksum = 0;  // CRC-32 of the payload bytes

  std::size_t payload_bytes() const;
};

// Fills in the checksum; throws ShapeError when the payload length
// disagrees with the header and IoError on write failure.
void write_volume(const fs::path& path, VolumeHeader header, std::span<const std::byte> payload);
// Throws FormatError (bad magic or header), ChecksumError (truncated or
// corrupted payload) or IoError.
std::pair<VolumeHeader, std::vector<std::byte>> read_volume(const fs::path& path);

void write_labels(const fs::path& path, const LatticeSpec& spec, const LabelField& z);
std::pair<LatticeSpec, LabelField> read_labels(const fs::path& path);

void write_image(const fs::path& path, const ImageVolume& y);
ImageVolume read_image(const fs::path& path);

// Plane-major float64 volume.
void write_planes(const fs::path& path, const LatticeSpec& spec, std::span<const double> values, std::size_t planes);
std::pair<VolumeHeader, std::vector<double>> read_planes(const fs::path& path);

// Volume of k planes plus a JSON sidecar at path + ".json".
void write_field_prior(const fs::path& path, const LatticeSpec& spec, const FieldPrior& field);
std::pair<LatticeSpec, FieldPrior> read_field_prior(const fs::path& path);

// CSV `beta,expected_stat` at 17 significant digits plus a JSON sidecar
// (same stem, .json) holding the metadata.
void write_path_table(const fs::path& csv_path, const PathTable& table);
PathTable read_path_table(const fs::path& csv_path);

// Chain output directory: traces.csv, counts.vol, modal.vol, chain.json.
void write_chain_result(const fs::path& dir, const LatticeSpec& spec, const ChainResult& result,
                        const std::vector<std::string>& names);
ChainResult read_chain_result(const fs::path& dir);
std::string traces_csv(const ChainResult& result, const std::vector<std::string>& names);

void write_delta_prior(const fs::path& path, const DeltaPriorState& state);
DeltaPriorState read_delta_prior(const fs::path& path);

DeltaHyper read_delta_hyper(const fs::path& path);
void write_delta_hyper(const fs::path& path, const DeltaHyper& hyper);

NoisePriors read_noise_priors(const fs::path& path);
void write_noise_priors(const fs::path& path, const NoisePriors& priors);

PhantomSpec read_phantom_spec(const fs::path& path);
void write_phantom_spec(const fs::path& path, const PhantomSpec& spec);

// Table-layout scores: header `tissue,<variant>`, one Dice row per label,
// then misclassification, beta_mean and sigma_delta rows.
struct ScoreFile {
  std::string variant;
  std::vector<std::string> names;
  std::vector<double> dice;
  double misclassification = 0.0;
  double beta_mean = 0.0;
  double sigma_delta = 0.0;  // NaN when no field prior was used
};
void write_score_file(const fs::path& path, const ScoreFile& score);
ScoreFile read_score_file(const fs::path& path);

std::string format_double(double v);  // 17 significant digits
std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace xfield::io
