#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "camokit/dataset.hpp"
#include "camokit/eval.hpp"
#include "camokit/textfusion.hpp"

namespace camokit::io {

/// Writes content to `path` atomically (temp file in the same directory,
/// then rename).
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

std::string read_file(const std::filesystem::path& path);

// --- Sub-description embedding files -------------------------------------
//
// Flat binary: three little-endian uint32 (class_id, K, D) followed by
// K*D little-endian float64 row-major values. An optional sidecar
// `<stem>.labels.txt` lists the K sub-description strings in order.

void write_subdescription_file(const std::filesystem::path& path,
                               const SubDescriptionSet& set);

SubDescriptionSet read_subdescription_file(const std::filesystem::path& path);

// --- Embedding field files ------------------------------------------------
//
// Flat binary: two little-endian uint32 (N, D) followed by N*D
// little-endian float64 row-major values.

void write_embedding_field_file(const std::filesystem::path& path,
                                const EmbeddingField& field);

EmbeddingField read_embedding_field_file(const std::filesystem::path& path);

// --- Detection / ground-truth text files ----------------------------------
//
// Detections: `image_id class_index x1 y1 x2 y2 confidence` per line.
// Ground truth: `image_id class_index x1 y1 x2 y2 [pixel_area]` per line.

std::string format_detections(std::span<const DetectionRecord> dets);
std::vector<DetectionRecord> parse_detections(const std::string& text);

std::string format_ground_truth(std::span<const GroundTruthRecord> gts);
std::vector<GroundTruthRecord> parse_ground_truth(const std::string& text);

// --- Masks ------------------------------------------------------------------

/// Reads a PGM (P2/P5) image as a binary mask: pixels above half of maxval
/// are foreground. `.txt` masks (rows of 0/1 characters) are also accepted.
MaskImage read_mask(const std::filesystem::path& path);

// --- Plain line-per-entry text files ---------------------------------------

std::vector<std::string> read_lines(const std::filesystem::path& path);
std::set<std::string> read_word_set(const std::filesystem::path& path);

/// Vocabulary: one canonical name per line, line index == class id.
void write_vocabulary(const std::filesystem::path& path,
                      const ClassVocabulary& vocab);

/// Base/novel split: one novel class id per line.
void write_novel_ids(const std::filesystem::path& path,
                     const ClassVocabulary& vocab);
std::vector<int> read_novel_ids(const std::filesystem::path& path);

/// Term repository: per class, `term<TAB>frequency` lines.
std::string format_terms(const ClassTerms& terms);

}  // namespace camokit::io
