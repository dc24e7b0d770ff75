#pragma once

#include "panelkit/model_spec.hpp"
#include "panelkit/numerics.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace panelkit {

// Long-format panel. Rows are sorted by (entity, period); entity labels sort
// lexicographically and period labels sort numerically when every label
// parses as an integer. Treat as immutable once built.
struct PanelDataset {
    std::vector<std::string> entities;
    std::vector<std::string> periods;
    std::vector<std::string> variables;
    std::vector<int> row_entity;  // per row, index into entities
    std::vector<int> row_period;  // per row, index into periods
    std::vector<std::vector<std::optional<double>>> values;  // [row][variable]
    bool balanced = false;
    std::string entity_column_name = "entity";
    std::string period_column_name = "period";

    int n_rows() const { return static_cast<int>(row_entity.size()); }
    int variable_index(const std::string& name) const;  // -1 when absent
    int entity_index_of(const std::string& label) const;
    int period_index_of(const std::string& label) const;
    // Row holding (entity, period), -1 when absent.
    int row_of(int entity, int period) const;
    std::optional<double> value(int row, int variable) const;
};

class PanelBuilder {
public:
    explicit PanelBuilder(std::vector<std::string> variables);
    PanelBuilder& column_names(std::string entity_column, std::string period_column);
    PanelBuilder& add_row(std::string entity, std::string period,
                          std::vector<std::optional<double>> row_values);
    PanelDataset build();

private:
    PanelDataset data_;
    std::vector<std::string> row_entity_labels_;
    std::vector<std::string> row_period_labels_;
};

// CSV, UTF-8, comma-separated, header row, one row per (entity, period).
// Empty numeric fields are missing values. Column names are case-sensitive.
PanelDataset load_csv(const std::string& path, const std::string& entity_column,
                      const std::string& period_column);
PanelDataset load_csv(std::istream& in, const std::string& entity_column,
                      const std::string& period_column, const std::string& origin = "<stream>");

// Round-trips doubles exactly (shortest-representation formatting).
void export_csv(const PanelDataset& data, std::ostream& out);
void export_csv(const PanelDataset& data, const std::string& path);

struct DummyBlock {
    std::string name;  // "DR" (entity dummies) or "DT" (time dummies)
    int first = 0;
    int count = 0;
};

struct DesignBundle {
    Vector y;
    Matrix X;
    std::vector<std::string> column_names;
    std::vector<int> entity_index;  // per design row, index into `entities`
    std::vector<int> period_index;
    std::vector<DummyBlock> dummy_blocks;
    std::vector<std::string> entities;  // labels present in the estimation sample
    std::vector<std::string> periods;
    int n_dropped = 0;  // rows removed by listwise deletion
    bool balanced = false;
};

// X = [intercept | regressors | entity dummies 2..E | time dummies 2..T];
// the first entity and period are the omitted baselines. Rows with a missing
// value in any used variable are dropped (listwise); dummies cover the
// entities/periods that survive deletion.
DesignBundle build_lsdv_design(const PanelDataset& data, const ModelSpec& spec);

// Group demeaning of dense columns, in place. `entity`/`period` hold dense
// ids for the rows of `columns`. One-way cases subtract group means exactly;
// balanced two-way uses x - x̄_i - x̄_t + x̄; unbalanced two-way alternates
// entity/time demeaning until the largest adjustment falls below 1e-10
// relative to the column scale (1000-sweep cap).
void demean_columns(Matrix& columns, const std::vector<int>& entity,
                    const std::vector<int>& period, int n_entities, int n_periods,
                    Effects effects);

// Returns a copy of `data` with the listed variables replaced by their
// two-way demeaned values. Rows where a variable is missing stay missing and
// do not enter that variable's means.
PanelDataset within_transform(const PanelDataset& data, const std::vector<std::string>& variables);

// Copy of `data` extended with 0/1 variables "DT_<period>" for periods
// 2..T, so time effects can enter a model as ordinary regressors.
PanelDataset with_time_dummies(const PanelDataset& data);

}  // namespace panelkit
