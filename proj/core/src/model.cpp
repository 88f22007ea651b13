#include "banditsim/model.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "banditsim/csv.hpp"
#include "banditsim/errors.hpp"

namespace banditsim {

Schema::Schema(std::vector<Column> columns) : columns_(std::move(columns)) {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (!index_.emplace(columns_[i].name, i).second) {
      throw SchemaError("duplicate column name '" + columns_[i].name + "'");
    }
  }
}

Schema Schema::binary(const std::vector<std::string>& names) {
  std::vector<Column> cols;
  cols.reserve(names.size());
  for (const auto& n : names) cols.push_back({n, ColumnKind::kBinary});
  return Schema(std::move(cols));
}

std::optional<std::size_t> Schema::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ActionSpace::ActionSpace(int physicians, int facilities) : physicians_(physicians), facilities_(facilities) {
  if (physicians < 1) throw DomainError("ActionSpace: need at least one physician");
  if (facilities < 0) throw DomainError("ActionSpace: facility count must be nonnegative");
}

std::size_t ActionSpace::size() const noexcept {
  const auto m = static_cast<std::size_t>(physicians_);
  return facilities_ > 0 ? m * static_cast<std::size_t>(facilities_) : m;
}

Action ActionSpace::at(std::size_t i) const {
  if (i >= size()) throw DomainError("ActionSpace::at: index out of range");
  if (facilities_ == 0) return {static_cast<int>(i) + 1, 0};
  const auto l = static_cast<std::size_t>(facilities_);
  return {static_cast<int>(i / l) + 1, static_cast<int>(i % l) + 1};
}

std::size_t ActionSpace::index_of(const Action& a) const {
  if (!contains(a)) throw DomainError("ActionSpace::index_of: action out of range");
  if (facilities_ == 0) return static_cast<std::size_t>(a.physician - 1);
  return static_cast<std::size_t>(a.physician - 1) * static_cast<std::size_t>(facilities_) +
         static_cast<std::size_t>(a.facility - 1);
}

std::vector<Action> ActionSpace::all() const {
  std::vector<Action> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i));
  return out;
}

bool ActionSpace::contains(const Action& a) const noexcept {
  if (a.physician < 1 || a.physician > physicians_) return false;
  if (facilities_ == 0) return a.facility == 0;
  return a.facility >= 1 && a.facility <= facilities_;
}

PatientContext encode_patient(const std::map<std::string, std::string>& raw_row, const Schema& schema,
                              std::string id) {
  PatientContext ctx{std::move(id), std::vector<double>(schema.size(), 0.0)};
  std::vector<bool> seen(schema.size(), false);
  for (const auto& [name, text] : raw_row) {
    auto idx = schema.index_of(name);
    if (!idx) throw SchemaError("unknown column '" + name + "'");
    const double v = parse_double(text, "column '" + name + "'");
    if (!std::isfinite(v)) throw ParseError("non-finite value in column '" + name + "'");
    if (schema.columns()[*idx].kind == ColumnKind::kBinary && v != 0.0 && v != 1.0) {
      throw SchemaError("binary column '" + name + "' has value " + std::string(text));
    }
    ctx.features[*idx] = v;
    seen[*idx] = true;
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (!seen[i] && schema.columns()[i].kind == ColumnKind::kNumeric) {
      throw SchemaError("missing numeric column '" + schema.columns()[i].name + "'");
    }
  }
  return ctx;
}

std::vector<double> encode_action(const Action& action, const ActionSpace& space) {
  if (!space.contains(action)) {
    throw DomainError("action (" + std::to_string(action.physician) + ", " + std::to_string(action.facility) +
                      ") outside action space");
  }
  std::vector<double> block(space.block_size(), 0.0);
  block[static_cast<std::size_t>(action.physician - 1)] = 1.0;
  if (space.facilities() > 0) {
    block[static_cast<std::size_t>(space.physicians() + action.facility - 1)] = 1.0;
  }
  return block;
}

std::size_t feature_dimension(std::size_t context_dim, const ActionSpace& space) noexcept {
  return 1 + context_dim + space.block_size();
}

EncodedInstance assemble(const PatientContext& context, const Action& action, const ActionSpace& space) {
  const auto block = encode_action(action, space);
  EncodedInstance out;
  out.phi.reserve(feature_dimension(context.features.size(), space));
  out.phi.push_back(1.0);
  out.phi.insert(out.phi.end(), context.features.begin(), context.features.end());
  out.phi.insert(out.phi.end(), block.begin(), block.end());
  return out;
}

int normalize_outcome(double raw) {
  if (raw == 1.0) return 1;
  if (raw == -1.0 || raw == 0.0) return -1;
  throw ParseError("outcome must be -1/+1 or 0/1, got " + format_double(raw));
}

namespace {

const std::set<std::string>& reserved_columns() {
  static const std::set<std::string> names{"patient_id", "action_p", "action_f", "outcome"};
  return names;
}

}  // namespace

Dataset read_dataset(std::istream& in) {
  const CsvTable table = read_csv(in);
  const int id_col = table.column("patient_id");
  if (id_col < 0) throw SchemaError("dataset CSV has no 'patient_id' column");
  const int p_col = table.column("action_p");
  const int f_col = table.column("action_f");
  const int y_col = table.column("outcome");

  std::vector<std::size_t> feature_cols;
  std::vector<Column> columns;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (reserved_columns().count(table.header[c])) continue;
    bool binary = true;
    for (const auto& row : table.rows) {
      const double v = parse_double(row[c], "column '" + table.header[c] + "'");
      if (v != 0.0 && v != 1.0) {
        binary = false;
        break;
      }
    }
    feature_cols.push_back(c);
    columns.push_back({table.header[c], binary ? ColumnKind::kBinary : ColumnKind::kNumeric});
  }

  Dataset data{Schema(std::move(columns)), {}};
  data.rows.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    std::map<std::string, std::string> raw;
    for (std::size_t c : feature_cols) raw.emplace(table.header[c], row[c]);
    DatasetRow out{encode_patient(raw, data.schema, row[static_cast<std::size_t>(id_col)]), {}, {}};
    if (p_col >= 0) {
      Action a;
      a.physician = static_cast<int>(parse_int(row[static_cast<std::size_t>(p_col)], "action_p"));
      a.facility = f_col >= 0 ? static_cast<int>(parse_int(row[static_cast<std::size_t>(f_col)], "action_f")) : 0;
      out.action = a;
    }
    if (y_col >= 0) {
      out.outcome = normalize_outcome(parse_double(row[static_cast<std::size_t>(y_col)], "outcome"));
    }
    data.rows.push_back(std::move(out));
  }
  return data;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset " + path.string());
  return read_dataset(in);
}

Dataset standardize_numeric(const Dataset& data) {
  Dataset out = data;
  const auto n = static_cast<double>(data.rows.size());
  if (data.rows.empty()) return out;
  for (std::size_t j = 0; j < data.schema.size(); ++j) {
    if (data.schema.columns()[j].kind != ColumnKind::kNumeric) continue;
    double mean = 0.0;
    for (const auto& r : data.rows) mean += r.context.features[j];
    mean /= n;
    double var = 0.0;
    for (const auto& r : data.rows) var += (r.context.features[j] - mean) * (r.context.features[j] - mean);
    const double sd = std::sqrt(var / n);
    if (sd == 0.0) continue;
    for (auto& r : out.rows) r.context.features[j] = (r.context.features[j] - mean) / sd;
  }
  return out;
}

}  // namespace banditsim
