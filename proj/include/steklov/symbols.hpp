#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "steklov/errors.hpp"
#include "steklov/geometry.hpp"

namespace steklov {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// mu bookkeeping for the resolvent traces and heat-coefficient densities.
// `carried` keeps the viscosity factor of the principal symbol in the
// resolvent denominators (consistent with the eigenvalue scaling law
// lambda_k(c*mu) = c*lambda_k(mu)); `paper` drops it there and weights the
// curvature density by mu instead. The two coincide at mu == 1.
enum class MuConvention { carried, paper };

// Sign used for the upper-index normal metric derivative dg^{ab}/dx_n that
// feeds the subprincipal chain. `strict` is the matrix-inverse-consistent
// value -2*kappa (the disk audit selects this one); `mirrored` copies the
// lower-index sign +2*kappa.
enum class IndexConvention { strict, mirrored };

struct SymbolMatrix {
    CMatrix value;
    int degree = 0;
    std::string family;
};

// Evaluation point for the symbol chain: the boundary jet, the shift
// constant rho >= 0, the cotangent vector, and (for resolvent symbols)
// the spectral parameter tau.
struct SymbolContext {
    BoundaryJet jet;
    double rho = 0.0;
    Eigen::VectorXd xi;  // size n-1
    std::optional<Complex> tau;
    IndexConvention index_convention = IndexConvention::strict;

    int n() const { return jet.dim; }
    void require_nonzero_xi() const;
    Complex require_tau() const;
};

struct BCSymbols {
    SymbolMatrix b1, b0, c2, c1, c0;
};

// Graded symbol: list of (degree, evaluator) pairs, strictly decreasing in
// degree. Evaluators take the tangential position x' and covector xi'.
// Analytic xi-derivatives may be supplied per term; otherwise Richardson
// central differences with step 1e-5*|xi| are used.
struct AsymptoticSymbol {
    using Evaluator = std::function<CMatrix(const Eigen::VectorXd& x, const Eigen::VectorXd& xi)>;
    using XiDerivative =
        std::function<CMatrix(const Eigen::VectorXd& x, const Eigen::VectorXd& xi, int k)>;

    struct Term {
        int degree;
        Evaluator eval;
        XiDerivative dxi;  // optional first xi-derivative
    };

    std::vector<Term> terms;
    int rows = 0;
    int cols = 0;

    static AsymptoticSymbol identity(int size);
    void check() const;  // degree monotonicity
};

// Graded composition truncated at `order` (lowest retained degree).
// Derivative depth is capped at |theta| <= 2; deeper requests raise
// UnsupportedOrderError.
AsymptoticSymbol compose(const AsymptoticSymbol& a, const AsymptoticSymbol& b, int order);

// ---- factorization-side symbols ((n+1)x(n+1)) ----
BCSymbols eval_bc(const SymbolContext& ctx);
SymbolMatrix eval_q1(const SymbolContext& ctx);
std::pair<SymbolMatrix, SymbolMatrix> eval_A1A2(const SymbolContext& ctx);
SymbolMatrix eval_E1(const SymbolContext& ctx);
SymbolMatrix eval_q0(const SymbolContext& ctx);
std::pair<SymbolMatrix, SymbolMatrix> eval_E0_qm1(const SymbolContext& ctx);

// ---- DtN-side symbols (n x n) ----
CVector eval_phi1(const SymbolContext& ctx);
SymbolMatrix eval_psi1(const SymbolContext& ctx);
SymbolMatrix eval_psi0(const SymbolContext& ctx);
SymbolMatrix solve_psi_column(const CVector& phi_column, const SymbolContext& ctx);

// ---- resolvent parametrix and traces ----
SymbolMatrix eval_varpi(int level, const SymbolContext& ctx);
Complex trace_varpi(int level, const SymbolContext& ctx,
                    MuConvention mu_conv = MuConvention::carried);

// (i/2pi) contour integral of e^{-t tau} (c-tau)^{-k}: (-t)^{k-1} e^{-t c}/(k-1)!
double residue_heat_factor(int pole_order, double t, double c);

// integral over R^{n-1} of e^{-c|xi|} (optionally with a xi_a^2/|xi|^2 weight)
double radial_integral(int n, double c, bool weighted);

double a0_density(int n, double mu = 1.0, MuConvention conv = MuConvention::carried);
double a1_density(const BoundaryJet& jet, int n, MuConvention conv);

enum class CoefficientKind { a0, a1 };
enum class PipelineRoute { closed_form, numeric };

// Boundary integral of the heat-coefficient density. `numeric` runs the
// resolvent-trace -> residue -> xi-quadrature pipeline instead of the
// closed-form density (planar domains only).
double assemble_coefficient(const PlanarDomain& domain, const ViscositySpec& visc,
                            CoefficientKind which, MuConvention conv,
                            PipelineRoute route = PipelineRoute::closed_form,
                            IndexConvention index_conv = IndexConvention::strict);

double sphere_volume(int dim);  // vol(S^dim)

}  // namespace steklov
