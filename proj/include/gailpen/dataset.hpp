#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "gailpen/geometry.hpp"

namespace gailpen {

// One labeled handwriting sample in source coordinates, one polyline per
// pen-down stroke.
struct RawSample {
  std::string id;
  std::string label;
  std::vector<std::vector<Point>> strokes;
};

struct ParseResult {
  std::vector<RawSample> samples;
  std::size_t skipped_segments = 0;  // segments with no pen-down points
};

// Parses the UNIPEN-subset text format:
//   - lines starting with "." are keyword lines; .SEGMENT opens a new sample
//     (label = last quoted token, else last plain token), .PEN_DOWN starts a
//     stroke, .PEN_UP ends it; all other keywords are ignored
//   - any other non-blank line is a coordinate line of whitespace-separated
//     numbers; the first two are x and y
// Coordinates inside a .PEN_UP block are discarded; a coordinate line before
// any pen state is a format error. Segments without pen-down points are
// skipped and counted.
ParseResult parse_unipen_subset(std::istream& text);

// Canonical trajectory file: one JSON record per line with keys
// "id", "label", "strokes" (array of arrays of [x, y] pairs). Writing is
// byte-reproducible: fixed key order, coordinates with 6 fractional digits.
void write_canonical(std::span<const RawSample> samples,
                     const std::filesystem::path& destination);
std::vector<RawSample> load_canonical(const std::filesystem::path& source);

enum class Split { train, test };

// Preprocessed fixed-length trajectories in the unit square.
struct Dataset {
  int horizon = 0;
  Split split = Split::train;
  std::uint64_t seed = 0;
  std::vector<Trajectory> samples;
};

struct BuildResult {
  Dataset train;
  Dataset test;
  std::size_t dropped = 0;  // samples with no points at all
};

// Concatenates each sample's strokes, normalizes to the unit square,
// resamples to `horizon` points, then splits by a seeded shuffle: the first
// floor(train_fraction * N) permuted samples form the training set.
BuildResult build_dataset(std::span<const RawSample> raw, int horizon,
                          double train_fraction, std::uint64_t seed);

// Dataset file: a header record {"count", "horizon", "seed", "split"}
// followed by one record {"id", "label", "points"} per trajectory, where
// "points" holds exactly `horizon` [x, y] pairs in [0,1].
void write_dataset(const Dataset& dataset,
                   const std::filesystem::path& destination);
Dataset load_dataset(const std::filesystem::path& source);

// FNV-1a 64-bit fingerprint of a file's bytes (manifest provenance).
std::uint64_t fingerprint_file(const std::filesystem::path& path);
std::uint64_t fingerprint_bytes(std::span<const unsigned char> bytes);

}  // namespace gailpen
