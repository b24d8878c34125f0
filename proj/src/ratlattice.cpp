#include "netwave/ratlattice.hpp"

#include <algorithm>
#include <sstream>

#include "netwave/errors.hpp"

namespace netwave {

namespace {

using ZMat = std::vector<std::vector<BigInt>>;

ZMat to_big(const std::vector<std::vector<std::int64_t>>& m) {
    ZMat r(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) r[i].assign(m[i].begin(), m[i].end());
    return r;
}

// Rank over the rationals by fraction-free elimination.
int rational_rank(ZMat m) {
    if (m.empty()) return 0;
    const std::size_t rows = m.size(), cols = m[0].size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && m[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(m[r], m[piv]);
        for (std::size_t i = r + 1; i < rows; ++i) {
            if (m[i][c] == 0) continue;
            BigInt a = m[r][c], b = m[i][c];
            for (std::size_t j = c; j < cols; ++j) m[i][j] = m[i][j] * a - m[r][j] * b;
        }
        ++r;
    }
    return static_cast<int>(r);
}

void normalize_sign(std::vector<BigInt>& v) {
    for (const auto& x : v) {
        if (x > 0) return;
        if (x < 0) {
            for (auto& y : v) y = -y;
            return;
        }
    }
}

std::int64_t to_i64(const BigInt& x) {
    if (x > std::numeric_limits<std::int64_t>::max() || x < std::numeric_limits<std::int64_t>::min())
        throw InvalidInput("integer kernel entry exceeds 64-bit range");
    return x.template convert_to<std::int64_t>();
}

// Canonical column Hermite form of the lattice spanned by the columns of `cols`
// (each column an N-vector). Used to compare kernel lattices.
ZMat column_hermite(ZMat cols_matrix, std::size_t n_rows) {
    // cols_matrix: n_rows x k. Column operations only.
    if (cols_matrix.empty()) return cols_matrix;
    std::size_t k = cols_matrix[0].size();
    std::size_t r = 0;
    auto col_nonzero = [&](std::size_t row, std::size_t c) { return cols_matrix[row][c] != 0; };
    for (std::size_t row = 0; row < n_rows && r < k; ++row) {
        // reduce columns c >= r against each other until at most one has a
        // nonzero entry in this row
        while (true) {
            std::size_t best = k;
            for (std::size_t c = r; c < k; ++c)
                if (col_nonzero(row, c) &&
                    (best == k || abs(cols_matrix[row][c]) < abs(cols_matrix[row][best])))
                    best = c;
            if (best == k) break;
            bool others = false;
            for (std::size_t c = r; c < k; ++c) {
                if (c == best || !col_nonzero(row, c)) continue;
                BigInt q = cols_matrix[row][c] / cols_matrix[row][best];
                for (std::size_t i = 0; i < n_rows; ++i)
                    cols_matrix[i][c] -= q * cols_matrix[i][best];
                if (cols_matrix[row][c] != 0) others = true;
            }
            if (!others) {
                for (std::size_t i = 0; i < n_rows; ++i)
                    std::swap(cols_matrix[i][r], cols_matrix[i][best]);
                break;
            }
        }
        if (!col_nonzero(row, r)) continue;
        if (cols_matrix[row][r] < 0)
            for (std::size_t i = 0; i < n_rows; ++i) cols_matrix[i][r] = -cols_matrix[i][r];
        // reduce earlier columns modulo the pivot
        for (std::size_t c = 0; c < r; ++c) {
            if (cols_matrix[row][c] == 0) continue;
            BigInt q = cols_matrix[row][c] / cols_matrix[row][r];
            if (cols_matrix[row][c] - q * cols_matrix[row][r] < 0) q -= 1;
            for (std::size_t i = 0; i < n_rows; ++i)
                cols_matrix[i][c] -= q * cols_matrix[i][r];
        }
        ++r;
    }
    // drop zero columns
    ZMat out(n_rows);
    for (std::size_t c = 0; c < k; ++c) {
        bool nonzero = false;
        for (std::size_t i = 0; i < n_rows; ++i) nonzero = nonzero || cols_matrix[i][c] != 0;
        if (nonzero)
            for (std::size_t i = 0; i < n_rows; ++i) out[i].push_back(cols_matrix[i][c]);
    }
    return out;
}

}  // namespace

void DelayVector::validate() const {
    const int N = num_delays();
    const int h = num_generators();
    if (N == 0 || h == 0) throw InvalidInput("delay vector: B must be a nonempty N x h matrix");
    for (const auto& row : B) {
        if (static_cast<int>(row.size()) != h) throw InvalidInput("delay vector: ragged B matrix");
        bool nonzero = false;
        for (auto v : row) {
            if (v < 0) throw InvalidInput("delay vector: B entries must be nonnegative");
            nonzero = nonzero || v > 0;
        }
        if (!nonzero) throw InvalidInput("delay vector: zero row in B (delay would vanish)");
    }
    if (h > N) throw InvalidInput("delay vector: more generators than delays");
    if (rational_rank(to_big(B)) != h) throw InvalidInput("delay vector: B is rank deficient");
    if (!symbolic()) {
        if (static_cast<int>(ell.size()) != h)
            throw InvalidInput("delay vector: generator value count does not match B");
        for (const auto& g : ell)
            if (g <= 0) throw InvalidInput("delay vector: generator values must be positive");
    }
}

std::vector<Rational> DelayVector::lengths() const {
    if (symbolic()) throw InvalidInput("delay vector: numeric operation on symbolic delays");
    std::vector<Rational> out(num_delays(), Rational(0));
    for (int i = 0; i < num_delays(); ++i)
        for (int j = 0; j < num_generators(); ++j) out[i] += Rational(B[i][j]) * ell[j];
    return out;
}

Rational DelayVector::length_max() const {
    auto L = lengths();
    return *std::max_element(L.begin(), L.end());
}

Rational DelayVector::length_min() const {
    auto L = lengths();
    return *std::min_element(L.begin(), L.end());
}

std::string ClassKey::str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < k.size(); ++i) os << (i ? "," : "") << k[i];
    os << ')';
    return os.str();
}

std::vector<std::vector<std::int64_t>> integer_kernel(const std::vector<std::vector<std::int64_t>>& B) {
    const std::size_t N = B.size();
    if (N == 0) throw InvalidInput("integer_kernel: empty matrix");
    const std::size_t h = B[0].size();

    // W = B^T (h x N); column elimination with unimodular tracking U (N x N).
    ZMat W(h, std::vector<BigInt>(N, 0));
    for (std::size_t i = 0; i < N; ++i) {
        if (B[i].size() != h) throw InvalidInput("integer_kernel: ragged matrix");
        for (std::size_t j = 0; j < h; ++j) W[j][i] = B[i][j];
    }
    ZMat U(N, std::vector<BigInt>(N, 0));
    for (std::size_t i = 0; i < N; ++i) U[i][i] = 1;

    std::size_t r = 0;  // next pivot column
    for (std::size_t row = 0; row < h; ++row) {
        while (true) {
            std::size_t best = N;
            for (std::size_t c = r; c < N; ++c)
                if (W[row][c] != 0 && (best == N || abs(W[row][c]) < abs(W[row][best]))) best = c;
            if (best == N) break;
            bool others = false;
            for (std::size_t c = r; c < N; ++c) {
                if (c == best || W[row][c] == 0) continue;
                BigInt q = W[row][c] / W[row][best];
                for (std::size_t i = 0; i < h; ++i) W[i][c] -= q * W[i][best];
                for (std::size_t i = 0; i < N; ++i) U[i][c] -= q * U[i][best];
                if (W[row][c] != 0) others = true;
            }
            if (!others) {
                for (std::size_t i = 0; i < h; ++i) std::swap(W[i][r], W[i][best]);
                for (std::size_t i = 0; i < N; ++i) std::swap(U[i][r], U[i][best]);
                break;
            }
        }
        if (r < N && W[row][r] != 0) ++r;
    }
    if (r != h) throw InvalidInput("integer_kernel: B is rank deficient (rank < h)");

    std::vector<std::vector<std::int64_t>> basis;
    for (std::size_t c = r; c < N; ++c) {
        std::vector<BigInt> v(N);
        for (std::size_t i = 0; i < N; ++i) v[i] = U[i][c];
        normalize_sign(v);
        std::vector<std::int64_t> vi(N);
        for (std::size_t i = 0; i < N; ++i) vi[i] = to_i64(v[i]);
        basis.push_back(std::move(vi));
    }
    std::sort(basis.begin(), basis.end());
    return basis;
}

ClassKey class_key(const std::vector<std::int64_t>& n, const DelayVector& delays) {
    const int N = delays.num_delays(), h = delays.num_generators();
    if (static_cast<int>(n.size()) != N) throw InvalidInput("class_key: dimension mismatch");
    ClassKey key;
    key.k.assign(h, 0);
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < N; ++i) key.k[j] += delays.B[i][j] * n[i];
    return key;
}

std::vector<std::vector<std::int64_t>> class_members(const ClassKey& key, const DelayVector& delays) {
    const int N = delays.num_delays(), h = delays.num_generators();
    if (static_cast<int>(key.k.size()) != h) throw InvalidInput("class_members: key dimension mismatch");
    for (auto v : key.k)
        if (v < 0) return {};

    std::vector<std::vector<std::int64_t>> out;
    std::vector<std::int64_t> n(N, 0), partial(h, 0);

    // DFS over coordinates; B >= 0 with nonzero rows makes B^T n componentwise
    // monotone, so partial <= key prunes exactly and terminates.
    auto fits = [&](int coord) {
        for (int j = 0; j < h; ++j)
            if (partial[j] + delays.B[coord][j] > key.k[j]) return false;
        return true;
    };
    auto rec = [&](auto&& self, int coord) -> void {
        if (coord == N) {
            if (partial == key.k) out.push_back(n);
            return;
        }
        self(self, coord + 1);  // n[coord] = 0 first: lexicographic order
        while (fits(coord)) {
            ++n[coord];
            for (int j = 0; j < h; ++j) partial[j] += delays.B[coord][j];
            self(self, coord + 1);
        }
        for (; n[coord] > 0; --n[coord])
            for (int j = 0; j < h; ++j) partial[j] -= delays.B[coord][j];
    };
    rec(rec, 0);
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<std::vector<Rational>> membership_V(const std::vector<Rational>& L, const DelayVector& delays) {
    const int N = delays.num_delays(), h = delays.num_generators();
    if (static_cast<int>(L.size()) != N) throw InvalidInput("membership_V: dimension mismatch");

    // Solve B x = L by rational Gaussian elimination on [B | L].
    std::vector<std::vector<Rational>> m(N, std::vector<Rational>(h + 1, Rational(0)));
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < h; ++j) m[i][j] = Rational(delays.B[i][j]);
        m[i][h] = L[i];
    }
    std::vector<int> pivot_row(h, -1);
    int r = 0;
    for (int c = 0; c < h && r < N; ++c) {
        int piv = -1;
        for (int i = r; i < N; ++i)
            if (m[i][c] != 0) { piv = i; break; }
        if (piv < 0) continue;
        std::swap(m[r], m[piv]);
        for (int i = 0; i < N; ++i) {
            if (i == r || m[i][c] == 0) continue;
            Rational f = m[i][c] / m[r][c];
            for (int j = c; j <= h; ++j) m[i][j] -= f * m[r][j];
        }
        pivot_row[c] = r;
        ++r;
    }
    for (int i = r; i < N; ++i)
        if (m[i][h] != 0) return std::nullopt;
    std::vector<Rational> x(h, Rational(0));
    for (int c = 0; c < h; ++c) {
        if (pivot_row[c] < 0) continue;  // free generator (cannot happen at full rank)
        x[c] = m[pivot_row[c]][h] / m[pivot_row[c]][c];
    }
    // full-rank B: verify
    for (int i = 0; i < N; ++i) {
        Rational s(0);
        for (int j = 0; j < h; ++j) s += Rational(delays.B[i][j]) * x[j];
        if (s != L[i]) return std::nullopt;
    }
    return x;
}

bool membership_V_symbolic(const DelayVector& L, const DelayVector& delays) {
    const int N = delays.num_delays();
    if (L.num_delays() != N) throw InvalidInput("membership_V: dimension mismatch");
    for (int c = 0; c < L.num_generators(); ++c) {
        std::vector<Rational> col(N);
        for (int i = 0; i < N; ++i) col[i] = Rational(L.B[i][c]);
        if (!membership_V(col, delays)) return false;
    }
    return true;
}

bool membership_W(const DelayVector& L, const DelayVector& delays) {
    if (!L.symbolic() || !delays.symbolic())
        throw InvalidInput(
            "membership_W requires symbolic generator forms; rational independence is "
            "undecidable from numeric values");
    if (L.num_delays() != delays.num_delays()) throw InvalidInput("membership_W: dimension mismatch");
    auto k1 = integer_kernel(delays.B);
    auto k2 = integer_kernel(L.B);
    const std::size_t N = delays.B.size();
    auto as_cols = [N](const std::vector<std::vector<std::int64_t>>& basis) {
        ZMat cols(N, std::vector<BigInt>(basis.size(), 0));
        for (std::size_t c = 0; c < basis.size(); ++c)
            for (std::size_t i = 0; i < N; ++i) cols[i][c] = basis[c][i];
        return cols;
    };
    return column_hermite(as_cols(k1), N) == column_hermite(as_cols(k2), N);
}

std::vector<std::vector<int>> delay_index_classes(const DelayVector& delays) {
    const int N = delays.num_delays();
    std::vector<std::vector<int>> classes;
    std::vector<bool> used(N, false);
    for (int i = 0; i < N; ++i) {
        if (used[i]) continue;
        std::vector<int> cls{i};
        used[i] = true;
        for (int j = i + 1; j < N; ++j)
            if (!used[j] && delays.B[i] == delays.B[j]) {
                cls.push_back(j);
                used[j] = true;
            }
        classes.push_back(std::move(cls));
    }
    return classes;
}

}  // namespace netwave
