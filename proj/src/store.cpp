#include "engram/store.hpp"

#include <sqlite3.h>

#include <bit>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <mutex>

#include "engram/errors.hpp"

namespace engram {

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS records(
    record_id INTEGER PRIMARY KEY,
    conversation_id TEXT NOT NULL,
    speaker TEXT NOT NULL,
    memory_type TEXT NOT NULL,
    title TEXT NOT NULL,
    body TEXT NOT NULL,
    anchor TEXT NOT NULL,
    source_turn INTEGER NOT NULL,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS embeddings(
    record_id INTEGER PRIMARY KEY REFERENCES records(record_id),
    dim INTEGER NOT NULL,
    vec BLOB NOT NULL
);
CREATE TABLE IF NOT EXISTS meta(
    key TEXT PRIMARY KEY,
    value TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_records_lookup
    ON records(conversation_id, memory_type, speaker);
)sql";

std::string now_utc() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Embeddings are persisted as little-endian IEEE-754 doubles for bit-exact
// roundtrips across close/reopen.
std::vector<std::uint8_t> pack_vec(const std::vector<double>& vec) {
    static_assert(std::endian::native == std::endian::little,
                  "blob packing assumes a little-endian host");
    std::vector<std::uint8_t> blob(vec.size() * sizeof(double));
    std::memcpy(blob.data(), vec.data(), blob.size());
    return blob;
}

std::vector<double> unpack_vec(const void* data, std::size_t bytes) {
    std::vector<double> vec(bytes / sizeof(double));
    std::memcpy(vec.data(), data, vec.size() * sizeof(double));
    return vec;
}

class Statement {
  public:
    Statement(sqlite3* db, const char* sql) : db_(db) {
        if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK)
            throw StorageError(std::string("prepare failed: ") + sqlite3_errmsg(db));
    }
    ~Statement() { sqlite3_finalize(stmt_); }
    Statement(const Statement&) = delete;
    Statement& operator=(const Statement&) = delete;

    Statement& bind(int index, const std::string& value) {
        check(sqlite3_bind_text(stmt_, index, value.c_str(), int(value.size()),
                                SQLITE_TRANSIENT));
        return *this;
    }
    Statement& bind(int index, long long value) {
        check(sqlite3_bind_int64(stmt_, index, value));
        return *this;
    }
    Statement& bind_blob(int index, const void* data, std::size_t bytes) {
        check(sqlite3_bind_blob(stmt_, index, data, int(bytes), SQLITE_TRANSIENT));
        return *this;
    }

    bool step() {
        int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) return true;
        if (rc == SQLITE_DONE) return false;
        throw StorageError(std::string("step failed: ") + sqlite3_errmsg(db_));
    }

    std::string column_text(int i) const {
        const unsigned char* p = sqlite3_column_text(stmt_, i);
        return p ? reinterpret_cast<const char*>(p) : "";
    }
    long long column_int64(int i) const { return sqlite3_column_int64(stmt_, i); }
    const void* column_blob(int i) const { return sqlite3_column_blob(stmt_, i); }
    int column_bytes(int i) const { return sqlite3_column_bytes(stmt_, i); }
    bool column_is_null(int i) const { return sqlite3_column_type(stmt_, i) == SQLITE_NULL; }

  private:
    void check(int rc) {
        if (rc != SQLITE_OK)
            throw StorageError(std::string("bind failed: ") + sqlite3_errmsg(db_));
    }
    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
};

constexpr const char* kRecordColumns =
    "r.record_id, r.conversation_id, r.speaker, r.memory_type, r.title, r.body, r.anchor, "
    "r.source_turn, e.dim, e.vec";

TypedRecord read_record(const Statement& stmt) {
    TypedRecord record;
    record.record_id = stmt.column_int64(0);
    record.conversation_id = stmt.column_text(1);
    record.speaker = stmt.column_text(2);
    record.memory_type = memory_type_from_string(stmt.column_text(3));
    record.title = stmt.column_text(4);
    record.body = stmt.column_text(5);
    record.anchor = stmt.column_text(6);
    record.source_turn = stmt.column_int64(7);
    if (!stmt.column_is_null(8)) {
        auto dim = stmt.column_int64(8);
        auto vec = unpack_vec(stmt.column_blob(9), std::size_t(stmt.column_bytes(9)));
        if (vec.size() != std::size_t(dim))
            throw StorageError("corrupt embedding blob for record " +
                               std::to_string(record.record_id));
        record.embedding = std::move(vec);
    }
    return record;
}

}  // namespace

struct MemoryStore::Impl {
    sqlite3* db = nullptr;
    mutable std::mutex write_mu;

    void exec(const char* sql) {
        char* err = nullptr;
        if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
            std::string message = err ? err : "unknown";
            sqlite3_free(err);
            throw StorageError("exec failed: " + message);
        }
    }

    std::optional<std::string> meta_get(const std::string& key) const {
        Statement stmt(db, "SELECT value FROM meta WHERE key = ?1");
        stmt.bind(1, key);
        if (!stmt.step()) return std::nullopt;
        return stmt.column_text(0);
    }

    void meta_put(const std::string& key, const std::string& value) {
        Statement stmt(db, "INSERT OR REPLACE INTO meta(key, value) VALUES(?1, ?2)");
        stmt.bind(1, key).bind(2, value);
        stmt.step();
    }
};

MemoryStore::MemoryStore(const std::string& db_path, int encoder_dim)
    : impl_(std::make_unique<Impl>()), db_path_(db_path) {
    if (sqlite3_open(db_path.c_str(), &impl_->db) != SQLITE_OK) {
        std::string message = impl_->db ? sqlite3_errmsg(impl_->db) : "out of memory";
        throw StorageError("cannot open database " + db_path + ": " + message);
    }
    impl_->exec("PRAGMA journal_mode = WAL");
    impl_->exec("PRAGMA foreign_keys = ON");
    impl_->exec(kSchema);

    auto stored_version = impl_->meta_get("schema_version");
    if (!stored_version) {
        impl_->meta_put("schema_version", "1");
    } else if (*stored_version != "1") {
        throw SchemaError("unsupported schema version " + *stored_version + " in " + db_path);
    }

    auto stored_dim = impl_->meta_get("encoder_dim");
    if (stored_dim) {
        int dim = std::stoi(*stored_dim);
        if (encoder_dim != 0 && encoder_dim != dim)
            throw DimensionMismatchError(dim, encoder_dim,
                                         "store " + db_path + " was created with another encoder");
        encoder_dim_ = dim;
    } else {
        if (encoder_dim <= 0)
            throw PreconditionError("a new store requires a positive encoder dimension");
        encoder_dim_ = encoder_dim;
        impl_->meta_put("encoder_dim", std::to_string(encoder_dim_));
    }
}

MemoryStore::~MemoryStore() {
    if (impl_ && impl_->db) sqlite3_close(impl_->db);
}

long long MemoryStore::put(const TypedRecord& record) {
    if (!record.embedding.empty() &&
        record.embedding.size() != std::size_t(encoder_dim_))
        throw DimensionMismatchError(encoder_dim_, int(record.embedding.size()), "put");
    if (record.body.empty()) throw PreconditionError("record body must be non-empty");
    if (record.memory_type == MemoryType::semantic && !record.title.empty())
        throw PreconditionError("semantic records carry no title");
    if (record.anchor.empty()) throw PreconditionError("record anchor must be non-empty");

    std::lock_guard lock(impl_->write_mu);
    impl_->exec("BEGIN IMMEDIATE");
    try {
        Statement stmt(impl_->db,
                       "INSERT INTO records(conversation_id, speaker, memory_type, title, body, "
                       "anchor, source_turn, created_at) VALUES(?1,?2,?3,?4,?5,?6,?7,?8)");
        stmt.bind(1, record.conversation_id)
            .bind(2, record.speaker)
            .bind(3, to_string(record.memory_type))
            .bind(4, record.title)
            .bind(5, record.body)
            .bind(6, record.anchor)
            .bind(7, record.source_turn)
            .bind(8, now_utc());
        stmt.step();
        long long id = sqlite3_last_insert_rowid(impl_->db);

        if (!record.embedding.empty()) {
            auto blob = pack_vec(record.embedding);
            Statement estmt(impl_->db,
                            "INSERT OR REPLACE INTO embeddings(record_id, dim, vec) "
                            "VALUES(?1,?2,?3)");
            estmt.bind(1, id)
                .bind(2, static_cast<long long>(record.embedding.size()))
                .bind_blob(3, blob.data(), blob.size());
            estmt.step();
        }
        impl_->exec("COMMIT");
        return id;
    } catch (...) {
        impl_->exec("ROLLBACK");
        throw;
    }
}

void MemoryStore::put_embedding(long long record_id, const std::vector<double>& vec) {
    if (vec.size() != std::size_t(encoder_dim_))
        throw DimensionMismatchError(encoder_dim_, int(vec.size()), "put_embedding");

    std::lock_guard lock(impl_->write_mu);
    {
        Statement probe(impl_->db, "SELECT 1 FROM records WHERE record_id = ?1");
        probe.bind(1, record_id);
        if (!probe.step())
            throw NotFoundError("no record with id " + std::to_string(record_id));
    }
    auto blob = pack_vec(vec);
    Statement stmt(impl_->db,
                   "INSERT OR REPLACE INTO embeddings(record_id, dim, vec) VALUES(?1,?2,?3)");
    stmt.bind(1, record_id)
        .bind(2, static_cast<long long>(vec.size()))
        .bind_blob(3, blob.data(), blob.size());
    stmt.step();
}

TypedRecord MemoryStore::get(long long record_id) const {
    std::string sql = std::string("SELECT ") + kRecordColumns +
                      " FROM records r LEFT JOIN embeddings e ON e.record_id = r.record_id "
                      "WHERE r.record_id = ?1";
    Statement stmt(impl_->db, sql.c_str());
    stmt.bind(1, record_id);
    if (!stmt.step()) throw NotFoundError("no record with id " + std::to_string(record_id));
    return read_record(stmt);
}

std::vector<TypedRecord> MemoryStore::get_by_type(
    const std::string& conversation_id, MemoryType type,
    const std::optional<std::string>& speaker) const {
    std::string sql = std::string("SELECT ") + kRecordColumns +
                      " FROM records r LEFT JOIN embeddings e ON e.record_id = r.record_id "
                      "WHERE r.conversation_id = ?1 AND r.memory_type = ?2";
    if (speaker) sql += " AND r.speaker = ?3";
    sql += " ORDER BY r.record_id";

    Statement stmt(impl_->db, sql.c_str());
    stmt.bind(1, conversation_id).bind(2, to_string(type));
    if (speaker) stmt.bind(3, *speaker);

    std::vector<TypedRecord> out;
    while (stmt.step()) out.push_back(read_record(stmt));
    return out;
}

std::vector<TypedRecord> MemoryStore::get_all(const std::string& conversation_id) const {
    std::string sql = std::string("SELECT ") + kRecordColumns +
                      " FROM records r LEFT JOIN embeddings e ON e.record_id = r.record_id "
                      "WHERE r.conversation_id = ?1 ORDER BY r.record_id";
    Statement stmt(impl_->db, sql.c_str());
    stmt.bind(1, conversation_id);
    std::vector<TypedRecord> out;
    while (stmt.step()) out.push_back(read_record(stmt));
    return out;
}

long long MemoryStore::count(const std::string& conversation_id) const {
    Statement stmt(impl_->db, "SELECT COUNT(*) FROM records WHERE conversation_id = ?1");
    stmt.bind(1, conversation_id);
    stmt.step();
    return stmt.column_int64(0);
}

std::vector<std::string> MemoryStore::speakers(const std::string& conversation_id) const {
    Statement stmt(impl_->db,
                   "SELECT DISTINCT speaker FROM records WHERE conversation_id = ?1 "
                   "ORDER BY speaker");
    stmt.bind(1, conversation_id);
    std::vector<std::string> out;
    while (stmt.step()) out.push_back(stmt.column_text(0));
    return out;
}

std::vector<std::string> MemoryStore::conversation_ids() const {
    Statement stmt(impl_->db,
                   "SELECT DISTINCT conversation_id FROM records ORDER BY conversation_id");
    std::vector<std::string> out;
    while (stmt.step()) out.push_back(stmt.column_text(0));
    return out;
}

bool MemoryStore::has_record(const std::string& conversation_id, long long source_turn,
                             MemoryType type) const {
    Statement stmt(impl_->db,
                   "SELECT 1 FROM records WHERE conversation_id = ?1 AND source_turn = ?2 "
                   "AND memory_type = ?3 LIMIT 1");
    stmt.bind(1, conversation_id).bind(2, source_turn).bind(3, to_string(type));
    return stmt.step();
}

}  // namespace engram
