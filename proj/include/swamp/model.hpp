#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "channel.hpp"
#include "prior.hpp"
#include "rng.hpp"

namespace swamp {

using Vector = std::vector<double>;

struct Triplet {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;

    friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// M x N measurement matrix, either dense or sparse.
///
/// Both storage kinds keep a row view and a column view of the same entries:
/// dense matrices hold a row-major and a column-major copy, sparse matrices
/// hold CSR and CSC indices. Solvers walk columns when updating a coefficient
/// and rows when refreshing factor-side quantities, so both walks stay
/// contiguous and cost O(nnz).
class MeasurementMatrix {
public:
    enum class Storage { dense, sparse };

    MeasurementMatrix() = default;

    static MeasurementMatrix dense(std::size_t rows, std::size_t cols, Vector row_major)
    {
        if (rows == 0 || cols == 0)
            throw std::invalid_argument("matrix dimensions must be positive");
        if (row_major.size() != rows * cols)
            throw std::invalid_argument("dense matrix: value count does not match dimensions");
        check_finite(row_major);

        MeasurementMatrix m;
        m.storage_ = Storage::dense;
        m.rows_ = rows;
        m.cols_ = cols;
        m.row_val_ = std::move(row_major);
        m.col_val_.resize(rows * cols);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                m.col_val_[c * rows + r] = m.row_val_[r * cols + c];
        return m;
    }

    /// Builds the dual index from (row, col, value) entries. Zero values are
    /// kept as explicit entries; duplicate coordinates are rejected.
    static MeasurementMatrix sparse(std::size_t rows, std::size_t cols, std::vector<Triplet> entries)
    {
        if (rows == 0 || cols == 0)
            throw std::invalid_argument("matrix dimensions must be positive");
        for (const auto& t : entries) {
            if (t.row >= rows || t.col >= cols)
                throw std::invalid_argument("sparse matrix: entry out of range");
            if (!std::isfinite(t.value))
                throw std::invalid_argument("matrix values must be finite");
        }

        MeasurementMatrix m;
        m.storage_ = Storage::sparse;
        m.rows_ = rows;
        m.cols_ = cols;

        std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        for (std::size_t k = 1; k < entries.size(); ++k)
            if (entries[k].row == entries[k - 1].row && entries[k].col == entries[k - 1].col)
                throw std::invalid_argument("sparse matrix: duplicate entry");

        m.row_ptr_.assign(rows + 1, 0);
        m.col_ptr_.assign(cols + 1, 0);
        for (const auto& t : entries) {
            ++m.row_ptr_[t.row + 1];
            ++m.col_ptr_[t.col + 1];
        }
        std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
        std::partial_sum(m.col_ptr_.begin(), m.col_ptr_.end(), m.col_ptr_.begin());

        const std::size_t nnz = entries.size();
        m.row_idx_.resize(nnz);
        m.row_val_.resize(nnz);
        m.col_idx_.resize(nnz);
        m.col_val_.resize(nnz);
        std::vector<std::size_t> fill(m.col_ptr_.begin(), m.col_ptr_.end() - 1);
        for (std::size_t k = 0; k < nnz; ++k) {
            const auto& t = entries[k];
            m.row_idx_[k] = static_cast<std::uint32_t>(t.col);
            m.row_val_[k] = t.value;
            const std::size_t slot = fill[t.col]++;
            m.col_idx_[slot] = static_cast<std::uint32_t>(t.row);
            m.col_val_[slot] = t.value;
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Storage storage() const { return storage_; }
    bool is_sparse() const { return storage_ == Storage::sparse; }

    /// Stored entries (M*N for dense).
    std::size_t nonzeros() const { return row_val_.size(); }

    std::size_t row_size(std::size_t r) const
    {
        return is_sparse() ? row_ptr_[r + 1] - row_ptr_[r] : cols_;
    }
    std::size_t col_size(std::size_t c) const
    {
        return is_sparse() ? col_ptr_[c + 1] - col_ptr_[c] : rows_;
    }

    double operator()(std::size_t r, std::size_t c) const
    {
        if (!is_sparse())
            return row_val_[r * cols_ + c];
        const auto first = row_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
        const auto last = row_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
        const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(c));
        if (it == last || *it != c)
            return 0.0;
        return row_val_[static_cast<std::size_t>(it - row_idx_.begin())];
    }

    /// Calls f(col, value) for every stored entry of row r.
    template <class F>
    void for_each_in_row(std::size_t r, F&& f) const
    {
        if (is_sparse()) {
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                f(static_cast<std::size_t>(row_idx_[k]), row_val_[k]);
        } else {
            const double* row = row_val_.data() + r * cols_;
            for (std::size_t c = 0; c < cols_; ++c)
                f(c, row[c]);
        }
    }

    /// Calls f(row, value) for every stored entry of column c.
    template <class F>
    void for_each_in_col(std::size_t c, F&& f) const
    {
        if (is_sparse()) {
            for (std::size_t k = col_ptr_[c]; k < col_ptr_[c + 1]; ++k)
                f(static_cast<std::size_t>(col_idx_[k]), col_val_[k]);
        } else {
            const double* col = col_val_.data() + c * rows_;
            for (std::size_t r = 0; r < rows_; ++r)
                f(r, col[r]);
        }
    }

    /// Entries in row-major order.
    std::vector<Triplet> triplets() const
    {
        std::vector<Triplet> out;
        out.reserve(nonzeros());
        for (std::size_t r = 0; r < rows_; ++r)
            for_each_in_row(r, [&](std::size_t c, double v) { out.push_back({r, c, v}); });
        return out;
    }

    /// Entries in column-major order.
    std::vector<Triplet> triplets_by_column() const
    {
        std::vector<Triplet> out;
        out.reserve(nonzeros());
        for (std::size_t c = 0; c < cols_; ++c)
            for_each_in_col(c, [&](std::size_t r, double v) { out.push_back({r, c, v}); });
        return out;
    }

    /// Dense row-major copy of the matrix.
    Vector to_dense() const
    {
        if (!is_sparse())
            return row_val_;
        Vector out(rows_ * cols_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r)
            for_each_in_row(r, [&](std::size_t c, double v) { out[r * cols_ + c] = v; });
        return out;
    }

    Vector multiply(std::span<const double> x) const
    {
        if (x.size() != cols_)
            throw std::invalid_argument("multiply: vector length does not match column count");
        Vector z(rows_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            double acc = 0.0;
            for_each_in_row(r, [&](std::size_t c, double v) { acc += v * x[c]; });
            z[r] = acc;
        }
        return z;
    }

private:
    static void check_finite(const Vector& v)
    {
        for (double x : v)
            if (!std::isfinite(x))
                throw std::invalid_argument("matrix values must be finite");
    }

    Storage storage_ = Storage::dense;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    // Dense: row_val_ is row-major, col_val_ column-major, index arrays unused.
    // Sparse: CSR in (row_ptr_, row_idx_, row_val_), CSC in (col_ptr_, col_idx_, col_val_).
    std::vector<std::size_t> row_ptr_, col_ptr_;
    std::vector<std::uint32_t> row_idx_, col_idx_;
    Vector row_val_, col_val_;
};

// ---------------------------------------------------------------------------
// Ensembles

struct GaussianIid {
    double gamma = 0.0; ///< entries ~ N(gamma/N, 1/N)
};
struct LowRank {
    double eta = 1.0; ///< inner dimension R = round(eta * N)
};
struct Pooling {
    std::size_t row_weight = 7;
    bool balanced_columns = false; ///< spread column degrees evenly
};

struct SparseGaussian {
    double density = 0.25; ///< fraction of stored entries, each ~ N(0, 1/(density N))
};

using EnsembleKind = std::variant<GaussianIid, LowRank, Pooling, SparseGaussian>;

struct EnsembleSpec {
    EnsembleKind kind = GaussianIid{};
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::uint64_t seed = 0;
};

inline MeasurementMatrix gen_gaussian_iid(std::size_t rows, std::size_t cols, double gamma, Rng& rng)
{
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("gen_gaussian_iid: dimensions must be positive");
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("gen_gaussian_iid: gamma must be finite and >= 0");
    const double n = static_cast<double>(cols);
    std::normal_distribution<double> dist(gamma / n, 1.0 / std::sqrt(n));
    Vector values(rows * cols);
    for (auto& v : values)
        v = dist(rng);
    return MeasurementMatrix::dense(rows, cols, std::move(values));
}

inline std::size_t lowrank_inner_dim(std::size_t cols, double eta)
{
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(eta * static_cast<double>(cols))));
}

/// Phi = (1/N) P Q with P (M x R), Q (R x N) standard Gaussian, R = max(1, round(eta N)).
inline MeasurementMatrix gen_lowrank(std::size_t rows, std::size_t cols, double eta, Rng& rng)
{
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("gen_lowrank: dimensions must be positive");
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("gen_lowrank: eta must lie in (0, 1]");
    const std::size_t inner = lowrank_inner_dim(cols, eta);

    std::normal_distribution<double> dist(0.0, 1.0);
    Vector p(rows * inner), q(inner * cols);
    for (auto& v : p)
        v = dist(rng);
    for (auto& v : q)
        v = dist(rng);

    const double scale = 1.0 / static_cast<double>(cols);
    Vector values(rows * cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        double* out = values.data() + r * cols;
        for (std::size_t k = 0; k < inner; ++k) {
            const double prk = p[r * inner + k] * scale;
            const double* qk = q.data() + k * cols;
            for (std::size_t c = 0; c < cols; ++c)
                out[c] += prk * qk[c];
        }
    }
    return MeasurementMatrix::dense(rows, cols, std::move(values));
}

/// Sparse 0/1 pooling matrix; each row has exactly `row_weight` ones at
/// distinct columns.
///
/// Default: columns drawn uniformly per row by a partial Fisher-Yates shuffle
/// of a persistent index array, so column degrees are binomial. With
/// `balanced_columns` the columns are dealt from successive random
/// permutations, so column degrees differ by at most one (up to the rare
/// reshuffle at a deck boundary when a row would repeat a column).
inline MeasurementMatrix gen_pooling(std::size_t rows, std::size_t cols, std::size_t row_weight, Rng& rng,
                                     bool balanced_columns = false)
{
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("gen_pooling: dimensions must be positive");
    if (row_weight == 0 || row_weight > cols)
        throw std::invalid_argument("gen_pooling: row weight must lie in [1, N]");

    std::vector<std::size_t> deck(cols);
    std::iota(deck.begin(), deck.end(), std::size_t{0});
    std::vector<Triplet> entries;
    entries.reserve(rows * row_weight);

    if (!balanced_columns) {
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t k = 0; k < row_weight; ++k) {
                std::uniform_int_distribution<std::size_t> pick(k, cols - 1);
                std::swap(deck[k], deck[pick(rng)]);
                entries.push_back({r, deck[k], 1.0});
            }
        }
        return MeasurementMatrix::sparse(rows, cols, std::move(entries));
    }

    std::shuffle(deck.begin(), deck.end(), rng);
    std::size_t next = 0;
    std::vector<std::size_t> row_cols;
    for (std::size_t r = 0; r < rows; ++r) {
        row_cols.clear();
        while (row_cols.size() < row_weight) {
            if (next == cols) {
                std::shuffle(deck.begin(), deck.end(), rng);
                next = 0;
            }
            const std::size_t c = deck[next];
            if (std::find(row_cols.begin(), row_cols.end(), c) != row_cols.end()) {
                // Repeat across a deck boundary; move it later in the deck.
                std::uniform_int_distribution<std::size_t> pick(next, cols - 1);
                std::swap(deck[next], deck[pick(rng)]);
                continue;
            }
            row_cols.push_back(c);
            ++next;
        }
        for (auto c : row_cols)
            entries.push_back({r, c, 1.0});
    }
    return MeasurementMatrix::sparse(rows, cols, std::move(entries));
}

/// Sparse Gaussian matrix: every row stores round(density * N) entries at
/// distinct uniform columns, valued N(0, 1/(density * N)) so that column
/// norms match the dense N(0, 1/N) ensemble.
inline MeasurementMatrix gen_sparse_gaussian(std::size_t rows, std::size_t cols, double density, Rng& rng)
{
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("gen_sparse_gaussian: dimensions must be positive");
    if (!(density > 0.0 && density <= 1.0))
        throw std::invalid_argument("gen_sparse_gaussian: density must lie in (0, 1]");
    const auto per_row = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(density * static_cast<double>(cols))));
    std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(density * static_cast<double>(cols)));
    std::vector<std::size_t> deck(cols);
    std::iota(deck.begin(), deck.end(), std::size_t{0});
    std::vector<Triplet> entries;
    entries.reserve(rows * per_row);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = 0; k < per_row; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, cols - 1);
            std::swap(deck[k], deck[pick(rng)]);
            entries.push_back({r, deck[k], dist(rng)});
        }
    }
    return MeasurementMatrix::sparse(rows, cols, std::move(entries));
}

inline MeasurementMatrix generate_matrix(const EnsembleSpec& spec)
{
    Rng rng(spec.seed);
    return std::visit(
        [&](const auto& kind) -> MeasurementMatrix {
            using K = std::decay_t<decltype(kind)>;
            if constexpr (std::is_same_v<K, GaussianIid>)
                return gen_gaussian_iid(spec.rows, spec.cols, kind.gamma, rng);
            else if constexpr (std::is_same_v<K, LowRank>)
                return gen_lowrank(spec.rows, spec.cols, kind.eta, rng);
            else if constexpr (std::is_same_v<K, Pooling>)
                return gen_pooling(spec.rows, spec.cols, kind.row_weight, rng, kind.balanced_columns);
            else
                return gen_sparse_gaussian(spec.rows, spec.cols, kind.density, rng);
        },
        spec.kind);
}

// ---------------------------------------------------------------------------
// Signals and measurements

/// Bernoulli-Gaussian draw: zero with probability 1 - rho, else N(mean, var).
inline Vector gen_signal(std::size_t n, const PriorParams& prior, Rng& rng)
{
    prior.validate();
    std::bernoulli_distribution active(prior.rho);
    std::normal_distribution<double> slab(prior.mean, std::sqrt(prior.var));
    Vector x(n, 0.0);
    for (auto& v : x)
        if (active(rng))
            v = slab(rng);
    return x;
}

/// 0/1 signal with exactly k ones at uniformly chosen positions.
inline Vector gen_binary_signal(std::size_t n, std::size_t k, Rng& rng)
{
    if (k > n)
        throw std::invalid_argument("gen_binary_signal: K must not exceed N");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Vector x(n, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        std::uniform_int_distribution<std::size_t> pick(j, n - 1);
        std::swap(idx[j], idx[pick(rng)]);
        x[idx[j]] = 1.0;
    }
    return x;
}

/// y = h(Phi x): AWGN adds N(0, delta); Sign returns sign(z) with sign(0) = +1.
inline Vector measure(const MeasurementMatrix& phi, std::span<const double> x, const OutputChannel& channel, Rng& rng)
{
    Vector y = phi.multiply(x);
    if (const auto* awgn = std::get_if<AwgnChannel>(&channel)) {
        if (!(awgn->delta >= 0.0) || !std::isfinite(awgn->delta))
            throw std::invalid_argument("measure: AWGN delta must be finite and >= 0");
        if (awgn->delta > 0.0) {
            std::normal_distribution<double> noise(0.0, std::sqrt(awgn->delta));
            for (auto& v : y)
                v += noise(rng);
        }
    } else {
        for (auto& v : y)
            v = v >= 0.0 ? 1.0 : -1.0;
    }
    return y;
}

// ---------------------------------------------------------------------------

struct ProblemInstance {
    MeasurementMatrix matrix;
    Vector y;
    std::optional<Vector> x_true;
    OutputChannel channel = AwgnChannel{};
    PriorParams prior;
    std::uint64_t seed = 0;

    std::size_t rows() const { return matrix.rows(); }
    std::size_t cols() const { return matrix.cols(); }

    void validate() const
    {
        prior.validate();
        if (y.size() != matrix.rows())
            throw std::invalid_argument("instance: y length does not match matrix rows");
        if (x_true && x_true->size() != matrix.cols())
            throw std::invalid_argument("instance: x_true length does not match matrix columns");
        for (double v : y)
            if (!std::isfinite(v))
                throw std::invalid_argument("instance: observations must be finite");
        if (is_sign(channel)) {
            for (double v : y)
                if (v != 1.0 && v != -1.0)
                    throw std::invalid_argument("instance: sign-channel observations must be +1 or -1");
        } else {
            const double d = std::get<AwgnChannel>(channel).delta;
            if (!(d >= 0.0) || !std::isfinite(d))
                throw std::invalid_argument("instance: AWGN delta must be finite and >= 0");
        }
    }
};

/// Draws x from the signal generator and measures it with `channel`; the
/// measurement noise uses a stream derived from `seed`.
inline ProblemInstance make_instance(MeasurementMatrix matrix, Vector x, OutputChannel channel,
                                     PriorParams prior, std::uint64_t seed)
{
    Rng noise_rng(derive_seed(seed, {0x6e6f697365ULL}));
    ProblemInstance inst;
    inst.y = measure(matrix, x, channel, noise_rng);
    inst.matrix = std::move(matrix);
    inst.x_true = std::move(x);
    inst.channel = channel;
    inst.prior = prior;
    inst.seed = seed;
    inst.validate();
    return inst;
}

} // namespace swamp
