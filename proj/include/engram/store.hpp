#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "engram/memory.hpp"

struct sqlite3;

namespace engram {

// Single-file SQLite store for TypedRecords and their embeddings.
// Writes are serialized through an internal mutex (single-writer contract);
// reads see only committed data.
class MemoryStore {
  public:
    // Opens or creates the database. `encoder_dim` must match the stored
    // dimension when the file already exists; pass 0 to adopt the stored one.
    explicit MemoryStore(const std::string& db_path, int encoder_dim = 0);
    ~MemoryStore();
    MemoryStore(const MemoryStore&) = delete;
    MemoryStore& operator=(const MemoryStore&) = delete;

    const std::string& db_path() const { return db_path_; }
    int encoder_dim() const { return encoder_dim_; }

    long long put(const TypedRecord& record);
    void put_embedding(long long record_id, const std::vector<double>& vec);

    TypedRecord get(long long record_id) const;
    std::vector<TypedRecord> get_by_type(const std::string& conversation_id, MemoryType type,
                                         const std::optional<std::string>& speaker = {}) const;
    std::vector<TypedRecord> get_all(const std::string& conversation_id) const;

    long long count(const std::string& conversation_id) const;
    std::vector<std::string> speakers(const std::string& conversation_id) const;
    std::vector<std::string> conversation_ids() const;

    // True when a record from this turn with this type is already stored —
    // the idempotence check used by repeated ingests.
    bool has_record(const std::string& conversation_id, long long source_turn,
                    MemoryType type) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::string db_path_;
    int encoder_dim_ = 0;
};

}  // namespace engram
