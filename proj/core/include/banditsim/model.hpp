#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace banditsim {

enum class ColumnKind { kBinary, kNumeric };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::kBinary;
};

/// Ordered feature columns. Names are unique.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Column> columns);

  /// All columns binary.
  static Schema binary(const std::vector<std::string>& names);

  const std::vector<Column>& columns() const noexcept { return columns_; }
  std::size_t size() const noexcept { return columns_.size(); }
  std::optional<std::size_t> index_of(const std::string& name) const;

 private:
  std::vector<Column> columns_;
  std::map<std::string, std::size_t> index_;
};

struct PatientContext {
  std::string id;
  std::vector<double> features;
};

/// A physician index in [1, M] and a facility index in [1, L], or 0 when facilities are disabled.
struct Action {
  int physician = 1;
  int facility = 0;

  friend bool operator==(const Action&, const Action&) = default;
};

/// M physicians and L facilities (L = 0 disables the facility choice).
class ActionSpace {
 public:
  ActionSpace(int physicians, int facilities = 0);

  int physicians() const noexcept { return physicians_; }
  int facilities() const noexcept { return facilities_; }

  /// Length of the indicator block, M + L.
  std::size_t block_size() const noexcept { return static_cast<std::size_t>(physicians_ + facilities_); }

  /// Number of distinct actions: M, or M*L with facilities.
  std::size_t size() const noexcept;

  /// Action at enumeration index i (physician-major).
  Action at(std::size_t i) const;
  std::size_t index_of(const Action& a) const;
  std::vector<Action> all() const;

  bool contains(const Action& a) const noexcept;

 private:
  int physicians_;
  int facilities_;
};

/// Joint feature vector: bias 1, patient features, physician indicators, facility indicators.
struct EncodedInstance {
  std::vector<double> phi;

  std::size_t dimension() const noexcept { return phi.size(); }
  std::span<const double> view() const noexcept { return phi; }
};

struct Observation {
  PatientContext context;
  Action action;
  int outcome = 1;  // -1 or +1
};

struct DatasetRow {
  PatientContext context;
  std::optional<Action> action;
  std::optional<int> outcome;
};

struct Dataset {
  Schema schema;
  std::vector<DatasetRow> rows;
};

/// Places raw column values into schema order. Absent binary columns become 0;
/// absent numeric columns are an error (no imputation).
PatientContext encode_patient(const std::map<std::string, std::string>& raw_row, const Schema& schema,
                              std::string id = {});

/// Indicator block e_p followed by e_f (empty facility part when L = 0).
std::vector<double> encode_action(const Action& action, const ActionSpace& space);

EncodedInstance assemble(const PatientContext& context, const Action& action, const ActionSpace& space);

/// Dimension 1 + d_x + M + L.
std::size_t feature_dimension(std::size_t context_dim, const ActionSpace& space) noexcept;

/// -1/+1 or 0/1 to -1/+1.
int normalize_outcome(double raw);

/// Reads the dataset CSV: `patient_id`, feature columns, optional `action_p`,
/// `action_f`, `outcome`. A feature column is binary when all its values are 0 or 1.
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);

/// Z-scores numeric columns with the dataset's own mean and (population) standard deviation.
/// Binary columns and zero-variance columns are left untouched.
Dataset standardize_numeric(const Dataset& data);

}  // namespace banditsim
