#include "panelkit/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace panelkit {

namespace {

std::string trim(std::string_view s) {
    size_t first = 0;
    while (first < s.size() && (s[first] == ' ' || s[first] == '\t')) ++first;
    size_t last = s.size();
    while (last > first && (s[last - 1] == ' ' || s[last - 1] == '\t')) --last;
    return std::string(s.substr(first, last - first));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(trim(field));
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(trim(field));
    return out;
}

bool parse_integer(const std::string& s, long long& out) {
    if (s.empty()) return false;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    errno = 0;
    out = std::strtod(s.c_str(), &end);
    return errno == 0 && end == s.c_str() + s.size();
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

// Numeric order when every label is an integer, lexicographic otherwise.
void sort_period_labels(std::vector<std::string>& labels) {
    bool all_integer = true;
    std::vector<long long> parsed(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) {
        if (!parse_integer(labels[i], parsed[i])) {
            all_integer = false;
            break;
        }
    }
    if (all_integer) {
        std::vector<size_t> order(labels.size());
        std::iota(order.begin(), order.end(), size_t{0});
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            if (parsed[a] != parsed[b]) return parsed[a] < parsed[b];
            return labels[a] < labels[b];
        });
        std::vector<std::string> sorted;
        sorted.reserve(labels.size());
        for (size_t i : order) sorted.push_back(labels[i]);
        labels = std::move(sorted);
    } else {
        std::sort(labels.begin(), labels.end());
    }
}

int find_label(const std::vector<std::string>& labels, const std::string& label) {
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return static_cast<int>(i);
    }
    return -1;
}

// Dense 0..(count-1) ids for the distinct values appearing in `sparse`,
// preserving the order of the original index space.
std::vector<int> densify(const std::vector<int>& sparse, int& count) {
    std::vector<int> seen;
    for (int v : sparse) {
        if (std::find(seen.begin(), seen.end(), v) == seen.end()) seen.push_back(v);
    }
    std::sort(seen.begin(), seen.end());
    std::unordered_map<int, int> rank;
    for (size_t i = 0; i < seen.size(); ++i) rank[seen[i]] = static_cast<int>(i);
    std::vector<int> dense(sparse.size());
    for (size_t i = 0; i < sparse.size(); ++i) dense[i] = rank[sparse[i]];
    count = static_cast<int>(seen.size());
    return dense;
}

void subtract_group_means(Matrix& columns, const std::vector<int>& group, int n_groups) {
    Matrix sums = Matrix::Zero(n_groups, columns.cols());
    Vector counts = Vector::Zero(n_groups);
    for (Eigen::Index r = 0; r < columns.rows(); ++r) {
        sums.row(group[r]) += columns.row(r);
        counts[group[r]] += 1.0;
    }
    for (int g = 0; g < n_groups; ++g) {
        if (counts[g] > 0.0) sums.row(g) /= counts[g];
    }
    for (Eigen::Index r = 0; r < columns.rows(); ++r) {
        columns.row(r) -= sums.row(group[r]);
    }
}

// Largest absolute group mean left in the columns, the convergence measure
// for the alternating pass.
double max_abs_group_mean(const Matrix& columns, const std::vector<int>& group, int n_groups) {
    Matrix sums = Matrix::Zero(n_groups, columns.cols());
    Vector counts = Vector::Zero(n_groups);
    for (Eigen::Index r = 0; r < columns.rows(); ++r) {
        sums.row(group[r]) += columns.row(r);
        counts[group[r]] += 1.0;
    }
    double worst = 0.0;
    for (int g = 0; g < n_groups; ++g) {
        if (counts[g] > 0.0) {
            worst = std::max(worst, (sums.row(g) / counts[g]).cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

}  // namespace

// ---------------------------------------------------------------------------
// PanelDataset

int PanelDataset::variable_index(const std::string& name) const {
    return find_label(variables, name);
}

int PanelDataset::entity_index_of(const std::string& label) const {
    return find_label(entities, label);
}

int PanelDataset::period_index_of(const std::string& label) const {
    return find_label(periods, label);
}

int PanelDataset::row_of(int entity, int period) const {
    const auto key = std::make_pair(entity, period);
    // Rows are sorted by (entity, period), so binary search applies.
    long lo = 0, hi = static_cast<long>(row_entity.size()) - 1;
    while (lo <= hi) {
        const long mid = lo + (hi - lo) / 2;
        const auto cur = std::make_pair(row_entity[mid], row_period[mid]);
        if (cur == key) return static_cast<int>(mid);
        if (cur < key) {
            lo = mid + 1;
        } else {
            hi = mid - 1;
        }
    }
    return -1;
}

std::optional<double> PanelDataset::value(int row, int variable) const {
    return values.at(static_cast<size_t>(row)).at(static_cast<size_t>(variable));
}

// ---------------------------------------------------------------------------
// PanelBuilder

PanelBuilder::PanelBuilder(std::vector<std::string> variables) {
    std::unordered_set<std::string> seen;
    for (const auto& v : variables) {
        if (v.empty()) throw std::invalid_argument("variable names must be non-empty");
        if (!seen.insert(v).second) {
            throw std::invalid_argument("variable '" + v + "' is declared twice");
        }
    }
    data_.variables = std::move(variables);
}

PanelBuilder& PanelBuilder::column_names(std::string entity_column, std::string period_column) {
    if (entity_column.empty() || period_column.empty()) {
        throw std::invalid_argument("entity and period column names must be non-empty");
    }
    if (entity_column == period_column) {
        throw std::invalid_argument("entity and period columns must differ");
    }
    data_.entity_column_name = std::move(entity_column);
    data_.period_column_name = std::move(period_column);
    return *this;
}

PanelBuilder& PanelBuilder::add_row(std::string entity, std::string period,
                                    std::vector<std::optional<double>> row_values) {
    if (entity.empty()) throw std::invalid_argument("row has an empty entity label");
    if (period.empty()) throw std::invalid_argument("row has an empty period label");
    if (row_values.size() != data_.variables.size()) {
        std::ostringstream msg;
        msg << "row (" << entity << ", " << period << ") has " << row_values.size()
            << " values for " << data_.variables.size() << " variables";
        throw std::invalid_argument(msg.str());
    }
    for (size_t i = 0; i < row_values.size(); ++i) {
        if (row_values[i] && !std::isfinite(*row_values[i])) {
            throw std::invalid_argument("non-finite value for '" + data_.variables[i] +
                                        "' at (" + entity + ", " + period + ")");
        }
    }
    row_entity_labels_.push_back(std::move(entity));
    row_period_labels_.push_back(std::move(period));
    data_.values.push_back(std::move(row_values));
    return *this;
}

PanelDataset PanelBuilder::build() {
    PanelDataset out = std::move(data_);

    std::set<std::string> entity_set(row_entity_labels_.begin(), row_entity_labels_.end());
    out.entities.assign(entity_set.begin(), entity_set.end());
    std::set<std::string> period_set(row_period_labels_.begin(), row_period_labels_.end());
    out.periods.assign(period_set.begin(), period_set.end());
    sort_period_labels(out.periods);

    std::unordered_map<std::string, int> entity_rank, period_rank;
    for (size_t i = 0; i < out.entities.size(); ++i) entity_rank[out.entities[i]] = static_cast<int>(i);
    for (size_t i = 0; i < out.periods.size(); ++i) period_rank[out.periods[i]] = static_cast<int>(i);

    const size_t n = row_entity_labels_.size();
    out.row_entity.resize(n);
    out.row_period.resize(n);
    std::set<std::pair<int, int>> keys;
    for (size_t i = 0; i < n; ++i) {
        out.row_entity[i] = entity_rank[row_entity_labels_[i]];
        out.row_period[i] = period_rank[row_period_labels_[i]];
        if (!keys.insert({out.row_entity[i], out.row_period[i]}).second) {
            throw std::invalid_argument("duplicate observation for (" + row_entity_labels_[i] +
                                        ", " + row_period_labels_[i] + ")");
        }
    }

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (out.row_entity[a] != out.row_entity[b]) return out.row_entity[a] < out.row_entity[b];
        return out.row_period[a] < out.row_period[b];
    });
    std::vector<int> sorted_entity(n), sorted_period(n);
    std::vector<std::vector<std::optional<double>>> sorted_values(n);
    for (size_t i = 0; i < n; ++i) {
        sorted_entity[i] = out.row_entity[order[i]];
        sorted_period[i] = out.row_period[order[i]];
        sorted_values[i] = std::move(out.values[order[i]]);
    }
    out.row_entity = std::move(sorted_entity);
    out.row_period = std::move(sorted_period);
    out.values = std::move(sorted_values);

    out.balanced = n == out.entities.size() * out.periods.size();
    return out;
}

// ---------------------------------------------------------------------------
// CSV

PanelDataset load_csv(std::istream& in, const std::string& entity_column,
                      const std::string& period_column, const std::string& origin) {
    std::string line;
    long line_no = 0;

    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!trim(line).empty()) return true;
        }
        return false;
    };

    if (!next_line()) {
        throw std::runtime_error(origin + ": empty file, expected a header row");
    }
    const std::vector<std::string> header = split_csv_line(line);
    int entity_col = -1, period_col = -1;
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == entity_column) entity_col = static_cast<int>(i);
        if (header[i] == period_column) period_col = static_cast<int>(i);
    }
    if (entity_col < 0) {
        throw std::runtime_error(origin + ": column '" + entity_column + "' not found in header");
    }
    if (period_col < 0) {
        throw std::runtime_error(origin + ": column '" + period_column + "' not found in header");
    }

    std::vector<std::string> variables;
    std::vector<int> variable_cols;
    for (size_t i = 0; i < header.size(); ++i) {
        if (static_cast<int>(i) == entity_col || static_cast<int>(i) == period_col) continue;
        if (header[i].empty()) {
            throw std::runtime_error(origin + ": header has an empty column name");
        }
        variables.push_back(header[i]);
        variable_cols.push_back(static_cast<int>(i));
    }

    PanelBuilder builder(variables);
    builder.column_names(entity_column, period_column);

    while (next_line()) {
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            std::ostringstream msg;
            msg << origin << ": row " << line_no << " has " << cells.size() << " fields, expected "
                << header.size();
            throw std::runtime_error(msg.str());
        }
        if (cells[entity_col].empty()) {
            std::ostringstream msg;
            msg << origin << ": row " << line_no << " has an empty '" << entity_column << "' cell";
            throw std::runtime_error(msg.str());
        }
        if (cells[period_col].empty()) {
            std::ostringstream msg;
            msg << origin << ": row " << line_no << " has an empty '" << period_column << "' cell";
            throw std::runtime_error(msg.str());
        }
        std::vector<std::optional<double>> row;
        row.reserve(variables.size());
        for (size_t v = 0; v < variables.size(); ++v) {
            const std::string& cell = cells[variable_cols[v]];
            if (cell.empty()) {
                row.push_back(std::nullopt);
                continue;
            }
            double parsed = 0.0;
            if (!parse_double(cell, parsed)) {
                std::ostringstream msg;
                msg << origin << ": cannot parse '" << cell << "' as a number (row " << line_no
                    << ", column '" << variables[v] << "')";
                throw std::runtime_error(msg.str());
            }
            row.push_back(parsed);
        }
        builder.add_row(cells[entity_col], cells[period_col], std::move(row));
    }

    return builder.build();
}

PanelDataset load_csv(const std::string& path, const std::string& entity_column,
                      const std::string& period_column) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    return load_csv(in, entity_column, period_column, path);
}

void export_csv(const PanelDataset& data, std::ostream& out) {
    out << data.entity_column_name << ',' << data.period_column_name;
    for (const auto& v : data.variables) out << ',' << v;
    out << '\n';
    for (int r = 0; r < data.n_rows(); ++r) {
        out << data.entities[data.row_entity[r]] << ',' << data.periods[data.row_period[r]];
        for (size_t v = 0; v < data.variables.size(); ++v) {
            out << ',';
            const auto& cell = data.values[r][v];
            if (cell) out << format_double(*cell);
        }
        out << '\n';
    }
}

void export_csv(const PanelDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    export_csv(data, out);
    if (!out) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

// ---------------------------------------------------------------------------
// Design construction

DesignBundle build_lsdv_design(const PanelDataset& data, const ModelSpec& spec) {
    validate_spec(spec);

    std::vector<std::string> used = {spec.dependent};
    used.insert(used.end(), spec.regressors.begin(), spec.regressors.end());
    std::vector<int> used_idx;
    for (const auto& name : used) {
        const int idx = data.variable_index(name);
        if (idx < 0) {
            throw std::invalid_argument("variable '" + name + "' not in dataset");
        }
        used_idx.push_back(idx);
    }

    std::vector<int> rows;
    for (int r = 0; r < data.n_rows(); ++r) {
        bool complete = true;
        for (int idx : used_idx) {
            if (!data.values[r][idx]) {
                complete = false;
                break;
            }
        }
        if (complete) rows.push_back(r);
    }
    if (rows.empty()) {
        throw std::invalid_argument("no observations remain after listwise deletion");
    }

    DesignBundle out;
    out.n_dropped = data.n_rows() - static_cast<int>(rows.size());

    // Surviving entities/periods keep panel order; dummies refer to them.
    std::vector<int> row_entity, row_period;
    for (int r : rows) {
        row_entity.push_back(data.row_entity[r]);
        row_period.push_back(data.row_period[r]);
    }
    int n_entities = 0, n_periods = 0;
    const std::vector<int> dense_entity = densify(row_entity, n_entities);
    const std::vector<int> dense_period = densify(row_period, n_periods);
    {
        std::set<int> es(row_entity.begin(), row_entity.end());
        for (int e : es) out.entities.push_back(data.entities[e]);
        std::set<int> ps(row_period.begin(), row_period.end());
        for (int p : ps) out.periods.push_back(data.periods[p]);
    }
    out.entity_index = row_entity;
    out.period_index = row_period;
    out.balanced = rows.size() == static_cast<size_t>(n_entities) * static_cast<size_t>(n_periods);

    const int n = static_cast<int>(rows.size());
    const int k = static_cast<int>(spec.regressors.size());
    const bool entity_dummies =
        (spec.effects == Effects::entity || spec.effects == Effects::twoway) && n_entities > 1;
    const bool time_dummies =
        (spec.effects == Effects::time || spec.effects == Effects::twoway) && n_periods > 1;
    const int p = (spec.intercept ? 1 : 0) + k + (entity_dummies ? n_entities - 1 : 0) +
                  (time_dummies ? n_periods - 1 : 0);

    out.y.resize(n);
    out.X = Matrix::Zero(n, p);
    int col = 0;
    if (spec.intercept) {
        out.column_names.push_back("const");
        out.X.col(col).setOnes();
        ++col;
    }
    const int first_regressor = col;
    for (int j = 0; j < k; ++j) {
        out.column_names.push_back(spec.regressors[j]);
        for (int i = 0; i < n; ++i) {
            out.X(i, col) = *data.values[rows[i]][used_idx[j + 1]];
        }
        ++col;
    }
    if (entity_dummies) {
        out.dummy_blocks.push_back({"DR", col, n_entities - 1});
        for (int e = 1; e < n_entities; ++e) {
            out.column_names.push_back("DR_" + out.entities[e]);
            for (int i = 0; i < n; ++i) {
                if (dense_entity[i] == e) out.X(i, col) = 1.0;
            }
            ++col;
        }
    }
    if (time_dummies) {
        out.dummy_blocks.push_back({"DT", col, n_periods - 1});
        for (int t = 1; t < n_periods; ++t) {
            out.column_names.push_back("DT_" + out.periods[t]);
            for (int i = 0; i < n; ++i) {
                if (dense_period[i] == t) out.X(i, col) = 1.0;
            }
            ++col;
        }
    }
    for (int i = 0; i < n; ++i) {
        out.y[i] = *data.values[rows[i]][used_idx[0]];
    }

    // A single surviving observation makes every column trivially constant;
    // the check is only meaningful with at least two rows.
    if (n >= 2) {
        for (int j = 0; j < k; ++j) {
            const auto column = out.X.col(first_regressor + j);
            const double scale = std::max(1.0, column.cwiseAbs().maxCoeff());
            if ((column.maxCoeff() - column.minCoeff()) <= 1e-14 * scale) {
                throw std::invalid_argument("regressor '" + spec.regressors[j] +
                                            "' is constant in the estimation sample");
            }
        }
    }

    return out;
}

// ---------------------------------------------------------------------------
// Demeaning

void demean_columns(Matrix& columns, const std::vector<int>& entity,
                    const std::vector<int>& period, int n_entities, int n_periods,
                    Effects effects) {
    if (effects == Effects::none || columns.rows() == 0) return;
    if (static_cast<size_t>(columns.rows()) != entity.size() ||
        static_cast<size_t>(columns.rows()) != period.size()) {
        throw std::invalid_argument("group id vectors do not match the column rows");
    }

    if (effects == Effects::entity) {
        subtract_group_means(columns, entity, n_entities);
        return;
    }
    if (effects == Effects::time) {
        subtract_group_means(columns, period, n_periods);
        return;
    }

    const bool balanced =
        columns.rows() == static_cast<Eigen::Index>(n_entities) * n_periods;
    if (balanced) {
        Matrix entity_means = Matrix::Zero(n_entities, columns.cols());
        Matrix period_means = Matrix::Zero(n_periods, columns.cols());
        Eigen::RowVectorXd grand = Eigen::RowVectorXd::Zero(columns.cols());
        for (Eigen::Index r = 0; r < columns.rows(); ++r) {
            entity_means.row(entity[r]) += columns.row(r);
            period_means.row(period[r]) += columns.row(r);
            grand += columns.row(r);
        }
        entity_means /= static_cast<double>(n_periods);
        period_means /= static_cast<double>(n_entities);
        grand /= static_cast<double>(columns.rows());
        for (Eigen::Index r = 0; r < columns.rows(); ++r) {
            columns.row(r) -= entity_means.row(entity[r]) + period_means.row(period[r]) - grand;
        }
        return;
    }

    // Unbalanced two-way: alternate entity and period demeaning until both
    // pass means vanish (relative to the original column scale).
    double scale = 1.0;
    if (columns.size() > 0) {
        scale = std::max(1.0, columns.cwiseAbs().maxCoeff());
    }
    const double tol = 1e-10 * scale;
    for (int sweep = 0; sweep < 1000; ++sweep) {
        subtract_group_means(columns, entity, n_entities);
        subtract_group_means(columns, period, n_periods);
        const double entity_drift = max_abs_group_mean(columns, entity, n_entities);
        const double period_drift = max_abs_group_mean(columns, period, n_periods);
        if (std::max(entity_drift, period_drift) <= tol) return;
    }
    throw std::runtime_error("two-way demeaning did not converge in 1000 sweeps");
}

// ---------------------------------------------------------------------------
// Dataset-level transforms

PanelDataset within_transform(const PanelDataset& data,
                              const std::vector<std::string>& variables) {
    if (variables.empty()) {
        throw std::invalid_argument("within_transform needs at least one variable");
    }
    PanelDataset out = data;
    for (const auto& name : variables) {
        const int idx = out.variable_index(name);
        if (idx < 0) {
            throw std::invalid_argument("variable '" + name + "' not in dataset");
        }
        std::vector<int> rows, row_entity, row_period;
        for (int r = 0; r < out.n_rows(); ++r) {
            if (out.values[r][idx]) {
                rows.push_back(r);
                row_entity.push_back(out.row_entity[r]);
                row_period.push_back(out.row_period[r]);
            }
        }
        if (rows.empty()) continue;
        int n_entities = 0, n_periods = 0;
        const std::vector<int> dense_entity = densify(row_entity, n_entities);
        const std::vector<int> dense_period = densify(row_period, n_periods);
        Matrix column(rows.size(), 1);
        for (size_t i = 0; i < rows.size(); ++i) column(i, 0) = *out.values[rows[i]][idx];
        demean_columns(column, dense_entity, dense_period, n_entities, n_periods,
                       Effects::twoway);
        for (size_t i = 0; i < rows.size(); ++i) out.values[rows[i]][idx] = column(i, 0);
    }
    return out;
}

PanelDataset with_time_dummies(const PanelDataset& data) {
    if (data.periods.size() < 2) {
        throw std::invalid_argument("time dummies need at least two periods");
    }
    PanelDataset out = data;
    for (size_t t = 1; t < data.periods.size(); ++t) {
        const std::string name = "DT_" + data.periods[t];
        if (out.variable_index(name) >= 0) {
            throw std::invalid_argument("variable '" + name + "' already exists");
        }
        out.variables.push_back(name);
        for (int r = 0; r < out.n_rows(); ++r) {
            out.values[r].push_back(out.row_period[r] == static_cast<int>(t) ? 1.0 : 0.0);
        }
    }
    return out;
}

}  // namespace panelkit
