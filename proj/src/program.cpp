#include "program.hpp"

#include <cmath>
#include <cstring>

#include "pstab/errors.hpp"

namespace pstab {

namespace {

double ipow(double v, long k) {
    double r = 1.0;
    for (long i = 0; i < k; ++i) r *= v;
    return r;
}

[[noreturn]] void domain_fail(const char* what, const Node* src) {
    throw DomainError(what, src ? to_string(*src) : std::string("?"));
}

// Value and first two derivatives of a unary instruction at v.
struct Coeffs {
    double f, f1, f2;
};

Coeffs unary_coeffs(const Instr& in, double v, int order) {
    switch (in.op) {
        case Op::Neg: return {-v, -1.0, 0.0};
        case Op::Sin: return {std::sin(v), std::cos(v), -std::sin(v)};
        case Op::Cos: return {std::cos(v), -std::sin(v), -std::cos(v)};
        case Op::Tan: {
            double c = std::cos(v);
            if (c == 0.0) domain_fail("tangent at a pole", in.src);
            double t = std::tan(v);
            double s = 1.0 + t * t;
            return {t, s, 2.0 * t * s};
        }
        case Op::Exp: {
            double e = std::exp(v);
            return {e, e, e};
        }
        case Op::Log:
            if (!(v > 0.0)) domain_fail("log of non-positive argument", in.src);
            return {std::log(v), 1.0 / v, -1.0 / (v * v)};
        case Op::Sqrt: {
            if (v < 0.0) domain_fail("sqrt of negative argument", in.src);
            double s = std::sqrt(v);
            if (order == 0) return {s, 0.0, 0.0};
            if (v == 0.0) domain_fail("sqrt is not differentiable at zero", in.src);
            return {s, 0.5 / s, -0.25 / (s * v)};
        }
        case Op::Atan: {
            double d = 1.0 + v * v;
            return {std::atan(v), 1.0 / d, -2.0 * v / (d * d)};
        }
        case Op::Abs: {
            double sg = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
            return {std::fabs(v), sg, 0.0};
        }
        case Op::PowInt: {
            long k = in.idx;
            if (k < 0) {
                if (v == 0.0) domain_fail("division by zero", in.src);
                double f = 1.0 / ipow(v, -k);
                double f1 = k * f / v;
                double f2 = (k - 1) * f1 / v;
                return {f, f1, f2};
            }
            double f = ipow(v, k);
            double f1 = k == 0 ? 0.0 : k * ipow(v, k - 1);
            double f2 = k < 2 ? 0.0 : double(k) * double(k - 1) * ipow(v, k - 2);
            return {f, f1, f2};
        }
        case Op::PowReal: {
            if (!(v > 0.0)) domain_fail("non-integer power of non-positive base", in.src);
            double p = in.c;
            double f = std::pow(v, p);
            return {f, p * f / v, p * (p - 1.0) * f / (v * v)};
        }
        default: break;
    }
    domain_fail("bad instruction", in.src);
}

bool is_unary(Op op) {
    switch (op) {
        case Op::Neg: case Op::Sin: case Op::Cos: case Op::Tan: case Op::Exp: case Op::Log:
        case Op::Sqrt: case Op::Atan: case Op::Abs: case Op::PowInt: case Op::PowReal:
            return true;
        default: return false;
    }
}

void check_finite(double v, const Node* src) {
    if (!std::isfinite(v)) domain_fail("non-finite result", src);
}

thread_local std::vector<double> tl_stack;

}  // namespace

Program::Program(NodePtr root) : root_(std::move(root)) { emit(*root_, 0); }

void Program::emit(const Node& n, int depth) {
    switch (n.kind) {
        case NodeKind::Constant:
            code_.push_back({Op::Const, 0, n.value, &n});
            max_stack_ = std::max(max_stack_, depth + 1);
            return;
        case NodeKind::Variable:
            code_.push_back({Op::Var, n.index, 0.0, &n});
            var_extent_ = std::max(var_extent_, n.index + 1);
            max_stack_ = std::max(max_stack_, depth + 1);
            return;
        case NodeKind::Parameter:
            code_.push_back({Op::Param, n.index, 0.0, &n});
            param_extent_ = std::max(param_extent_, n.index + 1);
            max_stack_ = std::max(max_stack_, depth + 1);
            return;
        case NodeKind::Unary: {
            emit(*n.a, depth);
            static const Op map[] = {Op::Neg, Op::Sin, Op::Cos, Op::Tan, Op::Exp,
                                     Op::Log, Op::Sqrt, Op::Atan, Op::Abs};
            code_.push_back({map[int(n.uop)], 0, 0.0, &n});
            return;
        }
        case NodeKind::Power:
            emit(*n.a, depth);
            if (n.integer_exponent)
                code_.push_back({Op::PowInt, int(n.value), 0.0, &n});
            else
                code_.push_back({Op::PowReal, 0, n.value, &n});
            return;
        case NodeKind::Binary: {
            emit(*n.a, depth);
            emit(*n.b, depth + 1);
            static const Op map[] = {Op::Add, Op::Sub, Op::Mul, Op::Div};
            code_.push_back({map[int(n.bop)], 0, 0.0, &n});
            return;
        }
    }
}

double Program::eval(const double* z, const double* p) const {
    double local[64];
    double* st = local;
    if (max_stack_ > 64) {
        tl_stack.resize(max_stack_);
        st = tl_stack.data();
    }
    int sp = 0;
    for (const Instr& in : code_) {
        switch (in.op) {
            case Op::Const: st[sp++] = in.c; break;
            case Op::Var: st[sp++] = z[in.idx]; break;
            case Op::Param: st[sp++] = p[in.idx]; break;
            case Op::Add: --sp; st[sp - 1] += st[sp]; break;
            case Op::Sub: --sp; st[sp - 1] -= st[sp]; break;
            case Op::Mul: --sp; st[sp - 1] *= st[sp]; break;
            case Op::Div:
                --sp;
                if (st[sp] == 0.0) domain_fail("division by zero", in.src);
                st[sp - 1] /= st[sp];
                break;
            default:
                st[sp - 1] = unary_coeffs(in, st[sp - 1], 0).f;
                break;
        }
        check_finite(st[sp - 1], in.src);
    }
    return st[0];
}

double Program::grad(const double* z, const double* p, int n, double* g) const {
    const int w = n + 1;
    thread_local std::vector<double> buf;
    buf.resize(std::size_t(max_stack_) * w);
    double* st = buf.data();
    int sp = 0;
    for (const Instr& in : code_) {
        if (in.op == Op::Const || in.op == Op::Var || in.op == Op::Param) {
            double* s = st + sp * w;
            std::memset(s, 0, sizeof(double) * w);
            if (in.op == Op::Const) s[0] = in.c;
            else if (in.op == Op::Param) s[0] = p[in.idx];
            else {
                s[0] = z[in.idx];
                s[1 + in.idx] = 1.0;
            }
            ++sp;
        } else if (is_unary(in.op)) {
            double* s = st + (sp - 1) * w;
            Coeffs c = unary_coeffs(in, s[0], 1);
            s[0] = c.f;
            for (int i = 1; i < w; ++i) s[i] *= c.f1;
        } else {
            double* a = st + (sp - 2) * w;
            const double* b = st + (sp - 1) * w;
            switch (in.op) {
                case Op::Add: for (int i = 0; i < w; ++i) a[i] += b[i]; break;
                case Op::Sub: for (int i = 0; i < w; ++i) a[i] -= b[i]; break;
                case Op::Mul: {
                    double av = a[0], bv = b[0];
                    for (int i = 1; i < w; ++i) a[i] = av * b[i] + bv * a[i];
                    a[0] = av * bv;
                    break;
                }
                case Op::Div: {
                    if (b[0] == 0.0) domain_fail("division by zero", in.src);
                    double q = a[0] / b[0];
                    for (int i = 1; i < w; ++i) a[i] = (a[i] - q * b[i]) / b[0];
                    a[0] = q;
                    break;
                }
                default: break;
            }
            --sp;
        }
        const double* top = st + (sp - 1) * w;
        for (int i = 0; i < w; ++i) check_finite(top[i], in.src);
    }
    std::memcpy(g, st + 1, sizeof(double) * n);
    return st[0];
}

double Program::hess(const double* z, const double* p, int n, double* g, double* h) const {
    const int w = 1 + n + n * n;
    thread_local std::vector<double> buf;
    buf.resize(std::size_t(max_stack_) * w);
    double* st = buf.data();
    int sp = 0;
    for (const Instr& in : code_) {
        if (in.op == Op::Const || in.op == Op::Var || in.op == Op::Param) {
            double* s = st + sp * w;
            std::memset(s, 0, sizeof(double) * w);
            if (in.op == Op::Const) s[0] = in.c;
            else if (in.op == Op::Param) s[0] = p[in.idx];
            else {
                s[0] = z[in.idx];
                s[1 + in.idx] = 1.0;
            }
            ++sp;
        } else if (is_unary(in.op)) {
            double* s = st + (sp - 1) * w;
            Coeffs c = unary_coeffs(in, s[0], 2);
            double* gs = s + 1;
            double* hs = s + 1 + n;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) hs[i * n + j] = c.f1 * hs[i * n + j] + c.f2 * gs[i] * gs[j];
            for (int i = 0; i < n; ++i) gs[i] *= c.f1;
            s[0] = c.f;
        } else {
            double* a = st + (sp - 2) * w;
            const double* b = st + (sp - 1) * w;
            double* ga = a + 1;
            double* ha = a + 1 + n;
            const double* gb = b + 1;
            const double* hb = b + 1 + n;
            switch (in.op) {
                case Op::Add: for (int i = 0; i < w; ++i) a[i] += b[i]; break;
                case Op::Sub: for (int i = 0; i < w; ++i) a[i] -= b[i]; break;
                case Op::Mul: {
                    double av = a[0], bv = b[0];
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            ha[i * n + j] = av * hb[i * n + j] + bv * ha[i * n + j] + ga[i] * gb[j] + gb[i] * ga[j];
                    for (int i = 0; i < n; ++i) ga[i] = av * gb[i] + bv * ga[i];
                    a[0] = av * bv;
                    break;
                }
                case Op::Div: {
                    // a / b = a * r with r = 1/b
                    double bv = b[0];
                    if (bv == 0.0) domain_fail("division by zero", in.src);
                    double r = 1.0 / bv, r1 = -r * r, r2 = 2.0 * r * r * r;
                    double av = a[0];
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j) {
                            double hr = r1 * hb[i * n + j] + r2 * gb[i] * gb[j];
                            ha[i * n + j] = av * hr + r * ha[i * n + j] + ga[i] * r1 * gb[j] + r1 * gb[i] * ga[j];
                        }
                    for (int i = 0; i < n; ++i) ga[i] = av * r1 * gb[i] + r * ga[i];
                    a[0] = av / bv;
                    break;
                }
                default: break;
            }
            --sp;
        }
        const double* top = st + (sp - 1) * w;
        for (int i = 0; i < w; ++i) check_finite(top[i], in.src);
    }
    std::memcpy(g, st + 1, sizeof(double) * n);
    std::memcpy(h, st + 1 + n, sizeof(double) * n * n);
    return st[0];
}

}  // namespace pstab
