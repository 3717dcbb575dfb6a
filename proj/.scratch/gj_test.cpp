// Directly exercise the refactorize path: build a small LP, pivot manually via
// public solve on trivial instances is awkward; instead replicate GJ here and
// compare against the solver's refactorize via a pathological case is hard.
// Simpler: random dense invertible B, run the same GJ code pattern, check B*inv=I.
#include <cstdio>
#include <cmath>
#include <random>
#include <vector>
int main() {
    std::mt19937_64 rng(7);
    auto urand = [&](double a, double b){ return a + (b-a)*(double)(rng()>>11)/9007199254740992.0; };
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 1 + (int)(rng() % 40);
        std::vector<double> B(m*m), A;
        for (auto& v : B) v = urand(-10, 10);
        A = B;
        std::vector<double> inv(m*m, 0.0);
        for (int i = 0; i < m; ++i) inv[i*m+i] = 1.0;
        bool ok = true;
        for (int col = 0; col < m && ok; ++col) {
            int piv = -1; double best = 0;
            for (int r = col; r < m; ++r) { double v = std::abs(B[r*m+col]); if (v > best) { best = v; piv = r; } }
            if (piv < 0 || best < 1e-11) { ok = false; break; }
            if (piv != col) for (int k = 0; k < m; ++k) { std::swap(B[piv*m+k], B[col*m+k]); std::swap(inv[piv*m+k], inv[col*m+k]); }
            const double d = B[col*m+col];
            for (int k = 0; k < m; ++k) { B[col*m+k] /= d; inv[col*m+k] /= d; }
            for (int r = 0; r < m; ++r) {
                if (r == col) continue;
                const double f = B[r*m+col];
                if (f == 0.0) continue;
                for (int k = 0; k < m; ++k) { B[r*m+k] -= f*B[col*m+k]; inv[r*m+k] -= f*inv[col*m+k]; }
            }
        }
        if (!ok) continue;
        // check inv*A == I
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                double acc = 0;
                for (int k = 0; k < m; ++k) acc += inv[i*m+k]*A[k*m+j];
                worst = std::max(worst, std::abs(acc - (i==j ? 1.0 : 0.0)));
            }
    }
    std::printf("GJ worst |inv*A - I| = %.3g\n", worst);
    return 0;
}
