#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "decor/deconstruct.hpp"
#include "decor/sifting.hpp"
#include "decor/types.hpp"

namespace decor {

/// One historical query before capability augmentation.
struct RawLogRecord {
  std::string id;
  std::string query;
  std::vector<ExecutionRecord> records;
};

/// The persistent historical library: id-ordered entries plus optional
/// precomputed Stage B vectors guarded by the producing embedder's tag.
struct LogStore {
  std::vector<HistoryEntry> entries;
  std::map<std::string, EmbeddingVector> vectors;
  std::string embedder_tag;

  /// Path the store was loaded from; appends persist here when set.
  std::optional<std::string> path;

  InvertedIndex build_index() const;
  bool has_id(const std::string& id) const;
};

/// Serializes one entry (and its cached vector, when present) to the
/// canonical sorted-key JSONL line.
std::string entry_to_jsonl(const LogStore& store, const HistoryEntry& entry);

/// Parses one JSONL file: an optional {"embedder_tag": ...} header line
/// followed by one entry object per line. Validates every invariant;
/// errors carry 1-based line numbers.
LogStore load_store(const std::string& path);

/// Writes the store back out in canonical form.
void save_store(const LogStore& store, const std::string& path);

/// Loads raw (profile-free) records from JSONL.
std::vector<RawLogRecord> load_raw_records(const std::string& path);

struct AugmentResult {
  LogStore store;
  std::size_t skipped = 0;  // raw records whose deconstruction failed
};

/// Offline augmentation: attaches a capability profile to each raw record
/// and precomputes its ranking vector. Failed deconstructions are skipped;
/// throws AllRecordsFailed when nothing survives.
AugmentResult augment_logs(const std::vector<RawLogRecord>& raw,
                           Deconstructor& deconstructor, Embedder& embedder);

/// Appends a validated entry; persists to the backing file when the store
/// has one. The caller must rebuild any derived index.
void append_entry(LogStore& store, const HistoryEntry& entry,
                  std::optional<EmbeddingVector> vector = std::nullopt);

}  // namespace decor
