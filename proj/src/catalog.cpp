#include "eds/catalog.hpp"

namespace eds {

namespace {

const char* kLaplace = R"(
[system]
name: laplace
ref: Laplace equation: elliptic structure, derived flag, q = 3, holomorphic Darboux invariants
[coords]
real x1 x2 u u1 u2 u11 u12
[forms]
dz = dx1 + i*dx2
I: du - u1*dx1 - u2*dx2, du1 - u11*dx1 - u12*dx2, du2 - u12*dx1 + u11*dx2
[fields]
D1 = d_x1 + u1*d_u + u11*d_u1 + u12*d_u2
D2 = d_x2 + u2*d_u + u12*d_u1 - u11*d_u2
[dplus]
D1 - i*D2
d_u11 + i*d_u12
[coframe]
basepoint: x1=0, x2=0, u=0, u1=0, u2=0, u11=0, u12=0
theta: du - u1*dx1 - u2*dx2
eta: du1 - i*du2 - (u11 - i*u12)*dz
sigma: dz
sigma: du11 - i*du12
adjust: imaginary
[expect]
elliptic
decomposable
dflag 4 6 7
vrank 5
darboux m=7 d=2 q=3 n=1 numeta=1 class=neither
invariant x1 + i*x2
invariant u1 - i*u2
invariant u11 - i*u12
not-invariant x1 - i*x2
normal
symbol elliptic
one-adapted
vessiot
constants zero
)";

// First-order equation W_zb = |W|^2/2 in real jet coordinates.
const char* kBen1 = R"(
[system]
name: ben-jet
ref: W_zb = |W|^2/2 as a first-order real system: minimal integrability, terminal flag of D+
[coords]
real x y u v u1 v1
[guards]
u^2 + v^2 != 0
[forms]
I: du - u1*dx + v1*dy, dv - v1*dx - (u1 - u^2 - v^2)*dy
[fields]
Dx = d_x + u1*d_u + v1*d_v
Dy = d_y - v1*d_u + (u1 - u^2 - v^2)*d_v
[dplus]
Dx - i*Dy + 2*(u*u1 + v*v1)*d_u1
d_u1 - i*d_v1
[expect]
elliptic
decomposable
darboux m=6 d=2 q=2 numeta=0 class=minimal
dplus-terminal 4
invariant x + i*y
invariant (u1 + i*v1)/(u + i*v) - u
)";

// Holomorphic 2-jets with the affine group acting; the quotient chart below.
const char* kBen2Jets = R"(
[system]
name: ben-jets
ref: W_zb = |W|^2/2 as a quotient of holomorphic 2-jets by the real affine group
[coords]
complex z w0 w1 w2
[guards]
w1 != 0
w0 - w0~ != 0
[forms]
H: dw0 - w1*dz, dw1 - w2*dz
[action]
Z1 = w0*d_w0 + w1*d_w1 + w2*d_w2
Z2 = d_w0
[expect]
symmetry
transverse
action-constants C^2_12 = -1
g-invariant 2*w1/(w0~ - w0)
g-invariant 2*w2/(w0~ - w0) + 2*w1^2/(w0~ - w0)^2
not-g-invariant w1/w0
k-invariant w2/w1
)";

const char* kBen2Quotient = R"(
[system]
name: ben-quotient
ref: W_zb = |W|^2/2 in the invariants z, W, W1 of the affine quotient
[coords]
complex z W W1
[guards]
W != 0
W - W~ != 0
[forms]
beta = dW - W1*dz - W*W~/2*dz~
I: beta, beta~
[dplus]
d_z + W1*d_W + W*W~/2*d_W~ + W*(W~^2/4 + W1~/2)*d_W1~
d_W1
[expect]
elliptic
darboux m=6 d=2 q=2 class=minimal
invariant z
invariant W1/W - W/2
)";

const char* kBen3 = R"(
[system]
name: ben-coframe
ref: W_zb = |W|^2/2 in coordinates z, W, xi: Vessiot coframe at z=0, xi=0, W=i, omega forms, integrable extension
[coords]
complex z W xi
[guards]
W != 0
[forms]
beta = dW - (W*xi + W^2/2)*dz - W*W~/2*dz~
I: beta, beta~
theta1 = dW/W - dW~/W~ - xi*dz + xi~*dz~
omega1 = dW/W - dW~/W~
[dplus]
d_z + (W*xi + W^2/2)*d_W + W*W~/2*d_W~
d_xi
[coframe]
basepoint: z=0, xi=0, W=i
theta: theta1
theta: 2*dW~/(W*W~) - dz - (W~ + 2*xi~)/W*dz~ - i*theta1
sigma: dz
sigma: dxi
S: xi, 0; 1 - i*xi, 0
[extension]
coords: complex z xi c1 c2
guard: c1 != 0
psi: xi*dz
psi: (1 - i*xi)*dz
[group]
coords: c1 c2
matrix: c1, 0; c2, 1
basis: 1, 0; 0, 0 | 0, 0; 1, 0
[solution]
data: f
field: W = -2*f1/(f - f~)
guard: f1
guard: f - f~
pde: W_b - W*W~/2
xi: W_z/W - W/2
sample: f = z^2 + 3*z
sample: f = exp(z)
sample: f = (z + 2)/(z - 3*i)
points: 20
tol: 1e-8
[expect]
elliptic
darboux m=6 d=2 q=2 class=minimal
invariant z
invariant xi
one-adapted
vessiot
constants C^2_12 = -1
killing 1 0 1
pmatrix -1, 0; i + (2 - i*W~)/W, W~/W
omega omega1; 2*dW~/(W*W~) - i*omega1
group-model
extension
extension-span dc1 - c1*xi*dz; dc2 - c1*(1 - i*xi)*dz
solution
holomorphic-xi
)";

const char* kCrStandard = R"(
[system]
name: crstandard
ref: Cauchy-Riemann system: maximal integrability, V = T*(1,0) + conj H, V(inf) = T*(1,0), normal
[coords]
real x y u v u1 v1
[forms]
I: du - u1*dx + v1*dy, dv - v1*dx - u1*dy
dz = dx + i*dy
dw = du + i*dv
dwz = du1 + i*dv1
[fields]
Dx = d_x + u1*d_u + v1*d_v
Dy = d_y - v1*d_u + u1*d_v
[dplus]
Dx - i*Dy
d_u1 - i*d_v1
[expect]
elliptic
decomposable
darboux m=6 d=2 q=3 n=0 class=maximal
invariant x + i*y
invariant u + i*v
invariant u1 + i*v1
span V = dz; dw; dwz; dw~ - (u1 - i*v1)*dz~
span Vinf = dz; dw; dwz
normal
)";

const char* kEb2Jets = R"(
[system]
name: eb2-jets
ref: abelian quotient of holomorphic 2-jets: commuting generators, transversality, invariant U
[coords]
complex z w0 w1 w2
[guards]
z - z~ != 0
[forms]
H: dw0 - w1*dz, dw1 - w2*dz
[extension]
coords: complex c1 c2
[group]
coords: c1 c2
matrix: 1, c1, c2; 0, 1, 0; 0, 0, 1
basis: 0, 1, 0; 0, 0, 0; 0, 0, 0 | 0, 0, 1; 0, 0, 0; 0, 0, 0
[jet]
independent: z
chain: w0 w1 w2
total: d_z + w1*d_w0 + w2*d_w1
[action]
Z1 = d_w0
Z2 = prolong z*d_w0
[expect]
group-model
prolongs z*d_w0 -> z*d_w0 + d_w1
symmetry
transverse
action-constants zero
g-invariant w1 - (w0 - w0~)/(z - z~)
k-invariant w2
)";

const char* kEb2Quotient = R"(
[system]
name: eb2-quotient
ref: U_zb = conj(U)/(z - conj z): minimal integrability, Darboux invariant xi, solution formula
[coords]
complex z U Uz
[guards]
z - z~ != 0
[forms]
beta = dU - Uz*dz - U~/(z - z~)*dz~
I: beta, beta~
[dplus]
d_z + Uz*d_U + U/(z~ - z)*d_U~ - (U + U~)/(z~ - z)^2*d_Uz~
d_Uz
[solution]
data: f
field: U = f1 - (f - f~)/(z - z~)
guard: z - z~
pde: U_b - U~/(z - z~)
xi: U_z + U/(z - z~)
sample: f = z^2 + 3*z
sample: f = exp(z)
sample: f = (z + 2)/(z - 3*i)
points: 20
tol: 1e-8
[expect]
elliptic
decomposable
darboux m=6 d=2 q=2 class=minimal
invariant z
invariant Uz + U/(z - z~)
solution
holomorphic-xi
)";

// Quotient chart of the Liouville equation u_zzb = s e^u/2 (s = +1 or -1).
std::string liouville_quotient(bool plus) {
    std::string sg = plus ? "+" : "-";
    std::string name = plus ? "liouville-plus" : "liouville-minus";
    std::string solution = plus ? "ln(-4*f1*f1~/(f - f~)^2)" : "ln(4*f1*f1~/(1 + f*f~)^2)";
    std::string guard = plus ? "guard: f - f~\n" : "";
    return R"(
[system]
name: )" + name + R"(-quotient
ref: elliptic Liouville equation Laplacian u = )" + sg + R"(2 exp(u): Darboux invariant u_zz - u_z^2/2, solution formula
[coords]
real u
complex z p q
[forms]
I: du - p*dz - p~*dz~, dp - q*dz )" + (plus ? "-" : "+") + R"( exp(u)/2*dz~, dp~ - q~*dz~ )" + (plus ? "-" : "+") + R"( exp(u)/2*dz
[dplus]
d_z + p*d_u + q*d_p )" + sg + R"( exp(u)/2*d_p~ )" + sg + R"( exp(u)*p~/2*d_q~
d_q
[solution]
data: f
field: u = )" + solution + R"(
guard: f1
)" + guard + R"(pde: u_zb )" + (plus ? "-" : "+") + R"( exp(u)/2
xi: u_zz - u_z^2/2
sample: f = z^2 + 3*z
sample: f = exp(z)
sample: f = (z + 2)/(z - 3*i)
points: 20
tol: 1e-8
[expect]
elliptic
decomposable
darboux m=7 d=2 q=2 class=minimal
invariant z
invariant q - p^2/2
solution
holomorphic-xi
)" + (plus ? "" : "schwarzian\n");
}

const char* kLiouvilleFields = R"(
Z1 = d_w0
Z2 = w0*d_w0 + w1*d_w1 + w2*d_w2 + w3*d_w3
Z3 = w0^2/2*d_w0 + w0*w1*d_w1 + (w0*w2 + w1^2)*d_w2 + (w0*w3 + 3*w1*w2)*d_w3
)";

std::string liouville_jets(bool plus) {
    std::string head = R"(
[system]
name: )" + std::string(plus ? "liouville-plus" : "liouville-minus") +
                       R"(-jets
ref: elliptic Liouville equation as a quotient of holomorphic 3-jets by a real form of SL(2,C)
[coords]
complex z w0 w1 w2 w3
[guards]
w1 != 0
)" + (plus ? "w0 - w0~ != 0\n" : "1 + w0*w0~ != 0\n") +
                       R"([forms]
H: dw0 - w1*dz, dw1 - w2*dz, dw2 - w3*dz
[jet]
independent: z
chain: w0 w1 w2 w3
total: d_z + w1*d_w0 + w2*d_w1 + w3*d_w2
[fields]
)" + kLiouvilleFields;
    if (plus)
        return head + R"([action]
A1 = Z1
A2 = Z2
A3 = Z3
[expect]
prolongs w0^2/2*d_w0 -> Z3
symmetry
transverse
action-constants C^1_12 = 1; C^2_13 = 1; C^3_23 = 1
action-killing 2 1 0
action-isomorphic sl2 yes
action-isomorphic su2 no
g-invariant ln(-4*w1*w1~/(w0 - w0~)^2)
k-invariant w3/w1 - 3/2*(w2/w1)^2
)";
    return head + R"([action]
W1 = 1/2*Z1 + Z3
W2 = i*Z2
W3 = i*(1/2*Z1 - Z3)
[expect]
symmetry
transverse
action-constants C^1_23 = 1; C^2_13 = -1; C^3_12 = 1
action-killing 0 3 0
action-isomorphic su2 yes
action-isomorphic sl2 no
g-invariant ln(4*w1*w1~/(1 + w0*w0~)^2)
not-g-invariant ln(-4*w1*w1~/(w0 - w0~)^2)
k-invariant w3/w1 - 3/2*(w2/w1)^2
)";
}

const char* kGoursat = R"(
[system]
name: goursat
ref: rank 3 system on a 7-manifold with derived rank 2: conformal symbol, polarized Vessiot coframe, sl(2,R) algebra, S and omega
[coords]
real u
complex z p xi
[guards]
1 - p^2 != 0
sin(u) != 0
cos(u) != 0
xi != 0
[define]
r = xi*(1 - p^2) + (1 + p^2)*tan(u)/2
den = 4*(1 - p^2)*(1 - p~^2)
[forms]
b0 = du - 2*p/(1-p^2)*dz - 2*p~/(1-p~^2)*dz~
b1 = dp - r*dz - (1-p^2)*(1+p~^2)/(2*(1-p~^2)*cos(u))*dz~
I: b0, b1, b1~
[coframe]
basepoint: u=0, z=0, p=0, xi=1
theta: -p/(4*xi*(1-p^2))*b0 - 1/(4*(1-p^2))*b1 + ((1-p^2)*sin(u) + (1+p^2)*cos(u)/xi)/den*b1~
theta: i*p/(4*xi*(1-p^2))*b0 - i/(4*(1-p^2))*b1 + (i*(1-p^2)*sin(u) - i*(1+p^2)*cos(u)/xi)/den*b1~
theta: 2*i*(1+p^2)/(4*(1-p^2))*b0 - 8*i*p*cos(u)/den*b1~
sigma: dz
sigma: dxi
adjust: polarize z xi
[expect]
symbol elliptic
one-adapted
kinv (xi+1)/2, i*(xi-1)/2, 0; i*(1-xi)/2, (xi+1)/2, 0; 0, 0, 1
vessiot
constants C^1_23 = -2; C^2_13 = -2; C^3_12 = -16
killing 2 1 0
isomorphic sl2 yes
isomorphic su2 no
smatrix (1 - 2*xi)/8, 0; -i*(2*xi + 1)/8, 0; 0, 0
omega p/(4*(p^2-1))*du + 1/(4*(p^2-1))*dp + ((cos(u) - sin(u))*p^2 + sin(u) + cos(u))/(4*(p^2-1)*(p~^2-1))*dp~; -i*p/(4*(p^2-1))*du + i/(4*(p^2-1))*dp - i*(p^2*(sin(u) + cos(u)) - sin(u) + cos(u))/(4*(p^2-1)*(p~^2-1))*dp~; -i*(p^2+1)/(2*(p^2-1))*du - 2*i*p*cos(u)/((p^2-1)*(p~^2-1))*dp~
)";

const char* kBiharmonicJets = R"(
[system]
name: biharmonic-jets
ref: biharmonic equation as Laplacian u = 2v, Laplacian v = 0 on a 12-manifold: q = 4, holomorphic Darboux invariants
[coords]
real x y u v u1 u2 v1 v2 u12 v12 r s
[forms]
I: du - u1*dx - u2*dy, du1 - (v + r)*dx - u12*dy, du2 - u12*dx - (v - r)*dy, dv - v1*dx - v2*dy, dv1 - s*dx - v12*dy, dv2 - v12*dx + s*dy
[fields]
Dx = d_x + u1*d_u + (v + r)*d_u1 + u12*d_u2 + v1*d_v + s*d_v1 + v12*d_v2
Dy = d_y + u2*d_u + u12*d_u1 + (v - r)*d_u2 + v2*d_v + v12*d_v1 - s*d_v2
[dplus]
Dx - i*Dy + (v1 + i*v2)/2*(d_r - i*d_u12)
d_r + i*d_u12
d_s + i*d_v12
[expect]
elliptic
decomposable
darboux m=12 d=3 q=4 class=neither
invariant x + i*y
invariant v1 - i*v2
invariant s - i*v12
invariant r - i*u12 - (x - i*y)*(v1 - i*v2)/2
)";

const char* kBiharmonicCoframe = R"(
[system]
name: biharmonic-coframe
ref: biharmonic equation in coordinates z, u_z, v_z, p, q: abelian Vessiot coframe and closed omega forms
[coords]
complex z uz vz p q
real u v
[forms]
Du = du - uz*dz - uz~*dz~
Duz = duz - (p + z~*vz)/2*dz - v/2*dz~
Dv = dv - vz*dz - vz~*dz~
Dvz = dvz - q/2*dz
[coframe]
basepoint: z=0, uz=0, vz=0, p=0, q=0, u=0, v=0
theta: i*Du - i*z~*Duz~
theta: Duz - Duz~ - z~/2*Dv
theta: i*Duz + i*Duz~ - i*z~/2*Dv
theta: i*Dv
eta: 2*Dvz
sigma: dz
sigma: dp
sigma: dq
R: 1, -i*z/2, -z/2, 0; 0, 1, 0, -i*z/2; 0, 0, 1, -z/2; 0, 0, 0, 1
S: 0, -i*p*z/2, 0, 0; 0, (p + z*vz)/2, 0, 0; 0, i*(p - z*vz)/2, 0, 0; 0, i*vz, 0, 0
[expect]
one-adapted
vessiot
constants zero
killing 0 0 4
omega
)";

const char* kBiharmonicExtension = R"(
[system]
name: biharmonic-extension
ref: biharmonic equation: integrable extension by C^4 and its change of coordinates to a holomorphic contact system
[coords]
complex z p q vz c1 c2 c3 c4
[define]
k0 = -(c2 + i*c3 + i*c4*z)
k1 = -i*c4
k2 = vz
k3 = q/2
l0 = -2*i*c1 + (c2 - i*c3)*z
l1 = c2 - i*c3
l2 = p
[forms]
dk0 = d(k0)
dk1 = d(k1)
dk2 = d(k2)
dl0 = d(l0)
dl1 = d(l1)
[extension]
psi: -i*p*z/2*dz
psi: (p + z*vz)/2*dz
psi: i*(p - z*vz)/2*dz
psi: i*vz*dz
eta: dvz - q/2*dz
[group]
coords: c1 c2 c3 c4
matrix: 1, c1, c2, c3, c4; 0, 1, 0, 0, 0; 0, 0, 1, 0, 0; 0, 0, 0, 1, 0; 0, 0, 0, 0, 1
basis: 0,1,0,0,0; 0,0,0,0,0; 0,0,0,0,0; 0,0,0,0,0; 0,0,0,0,0 | 0,0,1,0,0; 0,0,0,0,0; 0,0,0,0,0; 0,0,0,0,0; 0,0,0,0,0 | 0,0,0,1,0; 0,0,0,0,0; 0,0,0,0,0; 0,0,0,0,0; 0,0,0,0,0 | 0,0,0,0,1; 0,0,0,0,0; 0,0,0,0,0; 0,0,0,0,0; 0,0,0,0,0
[solution]
data: f g
field: u = (g + z~*f + g~ + z*f~)/2
field: v = f1 + f1~
pde: u_zzbb
pde: 4*u_zb - 2*v
pde: v_zb
pde: u - u~
sample: f = z^2; g = exp(z)
sample: f = 1/(z - 2); g = z^4
sample: f = exp(i*z); g = z^3 - z
points: 20
tol: 1e-7
[expect]
group-model
extension
extension-span dc1 + i/2*p*z*dz; dc2 - (p + z*vz)/2*dz; dc3 - i/2*(p - z*vz)*dz; dc4 - i*vz*dz; dvz - q/2*dz
extension-span dk0 - k1*dz; dk1 - k2*dz; dk2 - k3*dz; dl0 - l1*dz; dl1 - l2*dz
solution
)";

const char* kCartanHilbert = R"(
[system]
name: cartan-hilbert
ref: Cartan-Hilbert equation l_z = k_zz^2: real invariant U of a nilpotent symmetry algebra, its derivatives, the Darboux invariant xi and the PDE for U
[coords]
complex z k l kz kzz kzzz kzzzz
[define]
D = (z - z~)
U = i*((l - l~)/4 - 3*(k - k~)^2/D^3 - (kz^2 + kz*kz~ + kz~^2)/D + 3*(k - k~)*(kz + kz~)/D^2)
alpha = kzz - (4*kz + 2*kz~)/D + 6*(k - k~)/D^2
[guards]
z - z~ != 0
-(1 + i)*alpha > 0
[forms]
H: dk - kz*dz, dkz - kzz*dz, dkzz - kzzz*dz, dkzzz - kzzzz*dz, dl - kzz^2*dz
[fields]
Dz = d_z + kz*d_k + kzz*d_kz + kzzz*d_kzz + kzzzz*d_kzzz + kzz^2*d_l
[jet]
independent: z
chain: k kz kzz kzzz kzzzz
total: Dz
[action]
Z3 = prolong 3*z*d_k + 3*d_kz
Z7 = prolong -7*d_k
Z10 = prolong d_l
Z11 = prolong -z^2/4*d_k - z/2*d_kz - 1/2*d_kzz - kz*d_l
Z14 = prolong -z^3/144*d_k - z^2/48*d_kz - z/24*d_kzz + (k - z*kz)/12*d_l
[solution]
data: k l
field: U = i*((l - l~)/4 - 3*(k - k~)^2/(z - z~)^3 - (k1^2 + k1*k1~ + k1~^2)/(z - z~) + 3*(k - k~)*(k1 + k1~)/(z - z~)^2)
guard: z - z~
pde: U_zb - 4*sqrt(U_z*U_b)/(i*(z - z~))
sample: k = exp(z); l = exp(2*z)/2
sample: k = z^4/12 + z; l = z^5/5
sample: k = z^5/20; l = z^7/7
points: 20
tol: 1e-7
[expect]
identity Dz[U] == i/4*alpha^2
identity Dz~[U] == -i/4*alpha~^2
identity Dz~[Dz[U]] == i*alpha*alpha~/(z~ - z)
identity 2*Dz[Dz[Dz[U]]]/sqrt(Dz[U]) + 8*sqrt(Dz[U])/D^2 + 8*Dz[Dz[U]]/(sqrt(Dz[U])*D) - Dz[Dz[U]]^2/sqrt(Dz[U])^3 == -(1 + i)*sqrt(2)*kzzzz
action-constants
transverse
g-invariant U
not-g-invariant i*((l - l~)/4 - (k - k~)^2/D^3 - (k^2 + k*k~ + k~^2)/D + 3*(k - k~)*(kz + kz~)/D^2)
k-invariant kzzzz
long symmetry
solution
)";

CoordinateMap coordinate_map(const ChartPtr& a, const ChartPtr& b, const std::map<std::string, std::string>& m) {
    std::map<std::string, Expr> images;
    for (const auto& [k, v] : m) images[k] = a->parse(v);
    return CoordinateMap(a, b, images);
}

std::vector<Form> form_list(const ChartPtr& c, const std::vector<std::string>& text,
                            const std::map<std::string, Form>& named = {}) {
    std::vector<Form> out;
    for (const std::string& t : text) out.push_back(parse_form(c, t, named));
    return out;
}

void add_certificates(Report& rep, const std::string& prefix, const std::vector<Certificate>& cs, const std::string& ref) {
    for (const Certificate& c : cs) {
        Check& ch = rep.add(prefix + c.name, c.pass, ref);
        if (!c.pass) ch.witnesses.push_back(c.witness);
    }
}

std::string re_part(const std::string& x) { return "(((" + x + ") + (" + x + ")~)/2)"; }
std::string im_part(const std::string& x) { return "(((" + x + ") - (" + x + ")~)/(2*i))"; }

// Quotient diagram and the adapted coframe seen on the jet space.
void ben_extra(const RunOptions& opt, Report& rep) {
    const Settings& s = opt.settings;
    const std::string ref = "W_zb = |W|^2/2: quotient maps, chart of the extension and the adapted coframe upstairs";
    ChartPtr jets = make_chart("complex z w0 w1 w2", {"w1 + w1~ != 0", "w0 - w0~ != 0"});
    ChartPtr ext = make_chart("complex z xi c1 c2", {"c1 != 0"});
    ChartPtr wchart = make_chart("complex z W W1", {"W != 0", "W - W~ != 0"});
    ChartPtr base = make_chart("complex z xi; real r s");
    QuotientDiagram q{
        coordinate_map(jets, wchart, {{"z", "z"}, {"W", "2*w1/(w0~ - w0)"}, {"W1", "2*w2/(w0~ - w0) + 2*w1^2/(w0~ - w0)^2"}}),
        coordinate_map(jets, ext, {{"z", "z"}, {"xi", "w2/w1"}, {"c1", "w1"}, {"c2", "w0 - i*w1"}}),
        coordinate_map(wchart, base,
                       {{"z", "z"}, {"xi", "W1/W - W/2"}, {"r", "-" + re_part("W") + "/" + im_part("W")}, {"s", "1/" + im_part("W") + " - 1"}}),
        coordinate_map(ext, base, {{"z", "z"}, {"xi", "xi"}, {"r", im_part("c1") + "/" + re_part("c1")}, {"s", im_part("c2") + "/" + re_part("c1")}}),
        form_list(ext, {"dc1 - c1*xi*dz", "dc2 - c1*(1 - i*xi)*dz"}),
        form_list(jets, {"dw0 - w1*dz", "dw1 - w2*dz"}),
        form_list(wchart, {"dW - W1*dz - W*W~/2*dz~"}),
        make_bundle(jets, form_list(jets, {"dw0 - w1*dz", "dw1 - w2*dz", "dw0~ - w1~*dz~", "dw1~ - w2~*dz~"}), s),
    };
    add_certificates(rep, "quotient diagram: ", verify_quotient_diagram(q, s), ref);

    // theta = (1/W) beta - conj, (2/|W|^2) conj(beta) - i theta1 pulled back to the jets.
    std::map<std::string, Form> wf{{"beta", parse_form(wchart, "dW - W1*dz - W*W~/2*dz~")}};
    wf["t1"] = parse_form(wchart, "beta/W - beta~/W~", wf);
    std::vector<Form> down = form_list(wchart, {"t1", "2/(W*W~)*beta~ - i*t1"}, wf);
    std::map<std::string, Form> jf{{"t1", parse_form(jets, "(dw1 - w2*dz)/w1 - (dw1~ - w2~*dz~)/w1~")}};
    std::vector<Form> up = form_list(
        jets, {"t1", "(dw0 - w1*dz - dw0~ + w1~*dz~)/w1 + (w0~ - w0)/(w1*w1~)*(dw1~ - w2~*dz~) - i*t1"}, jf);
    std::vector<Form> pulled;
    for (const Form& f : down) pulled.push_back(q.pi_g.pullback(f));
    rep.add("adapted coframe pulls back to the jet-space forms", same_forms(pulled, up, s), ref);

    // The Darboux invariant xi = W1/W - W/2 comes from w2/w1 upstairs.
    Expr xi = q.pi_g.pullback(wchart->parse("W1/W - W/2"));
    rep.add("W1/W - W/2 pulls back to w2/w1", is_zero(xi - jets->parse("w2/w1"), jets->domain(), s).zero, ref);
}

void eb2_extra(const RunOptions& opt, Report& rep) {
    const Settings& s = opt.settings;
    const std::string ref = "U_zb = conj(U)/(z - conj z): quotient map from 2-jets";
    ChartPtr jets = make_chart("complex z w0 w1 w2", {"z - z~ != 0"});
    ChartPtr quot = make_chart("complex z U Uz", {"z - z~ != 0"});
    CoordinateMap pi = coordinate_map(
        jets, quot,
        {{"z", "z"}, {"U", "w1 - (w0 - w0~)/(z - z~)"}, {"Uz", "w2 - w1/(z - z~) + (w0 - w0~)/(z - z~)^2"}});
    Expr xi = pi.pullback(quot->parse("Uz + U/(z - z~)"));
    rep.add("xi pulls back to w2", is_zero(xi - jets->parse("w2"), jets->domain(), s).zero, ref);
    SubBundle e = make_bundle(jets, form_list(jets, {"dw0 - w1*dz", "dw1 - w2*dz", "dw0~ - w1~*dz~", "dw1~ - w2~*dz~"}), s);
    Form beta = parse_form(quot, "dU - Uz*dz - U~/(z - z~)*dz~");
    bool inside = contains_form(e, pi.pullback(beta), s) && contains_form(e, pi.pullback(conj(beta)), s);
    rep.add("quotient system pulls back into E", inside, ref);
}

// The two real forms give non-isomorphic algebras.
void liouville_extra(const RunOptions& opt, Report& rep) {
    const Settings& s = opt.settings;
    ChartPtr c = make_chart("complex z w0 w1 w2 w3", {"w1 != 0"});
    std::map<std::string, VectorField> z;
    std::vector<VectorField> plus, minus;
    int n = 0;
    for (const char* t : {"d_w0", "w0*d_w0 + w1*d_w1 + w2*d_w2 + w3*d_w3",
                          "w0^2/2*d_w0 + w0*w1*d_w1 + (w0*w2 + w1^2)*d_w2 + (w0*w3 + 3*w1*w2)*d_w3"}) {
        z["Z" + std::to_string(++n)] = parse_field(c, t);
        plus.push_back(z["Z" + std::to_string(n)]);
    }
    for (const char* t : {"1/2*Z1 + Z3", "i*Z2", "i*(1/2*Z1 - Z3)"}) minus.push_back(parse_field(c, t, z));
    Verdict v = algebras_isomorphic_lowdim(extract_constants(plus, s), extract_constants(minus, s));
    Check& ch = rep.add("sl(2,R) and su(2) generator algebras are not isomorphic", v == Verdict::No,
                        "elliptic Liouville equations with opposite signs");
    ch.witnesses.push_back("verdict " + to_string(v));
}

std::vector<CatalogEntry> build() {
    std::vector<CatalogEntry> out;
    out.push_back({"laplace", "Laplace equation in the plane", {kLaplace}, {}});
    out.push_back({"benequation", "W_zb = |W|^2/2: jet form, affine quotient, Vessiot coframe, extension, solutions",
                   {kBen1, kBen2Jets, kBen2Quotient, kBen3}, ben_extra});
    out.push_back({"crstandard", "Cauchy-Riemann equations", {kCrStandard}, {}});
    out.push_back({"eb2", "U_zb = conj(U)/(z - conj z) from an abelian quotient", {kEb2Jets, kEb2Quotient}, eb2_extra});
    out.push_back({"liouville-plus", "Laplacian u = 2 exp(u)", {liouville_jets(true), liouville_quotient(true)}, {}});
    out.push_back({"liouville-minus", "Laplacian u = -2 exp(u)", {liouville_jets(false), liouville_quotient(false)},
                   liouville_extra});
    out.push_back({"cartan-hilbert", "l_z = k_zz^2 and the PDE of its real invariant", {kCartanHilbert}, {}});
    out.push_back({"goursat", "rank 3 Pfaffian system with sl(2,R) Vessiot algebra", {kGoursat}, {}});
    out.push_back({"biharmonic", "biharmonic equation split as Laplacian u = 2v, Laplacian v = 0",
                   {kBiharmonicJets, kBiharmonicCoframe, kBiharmonicExtension}, {}});
    return out;
}

}  // namespace

const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries = build();
    return entries;
}

const CatalogEntry& find_entry(const std::string& name) {
    for (const CatalogEntry& e : catalog())
        if (e.name == name) return e;
    throw Error("unknown example '" + name + "'");
}

Report run_entry(const std::string& name, const RunOptions& opt) {
    const CatalogEntry& entry = find_entry(name);
    Report rep;
    rep.system = entry.name;
    rep.seed = opt.settings.seed;
    bool prefix = entry.systems.size() > 1 || entry.extra;
    for (const std::string& text : entry.systems) {
        SystemDef def = parse_system(text);
        Report r = run_system(def, opt);
        if (prefix)
            for (Check& c : r.checks) c.name = def.name + ": " + c.name;
        rep.merge(r);
    }
    if (entry.extra && (opt.stages & StageExtend)) {
        Report x;
        entry.extra(opt, x);
        for (Check& c : x.checks) c.name = entry.name + ": " + c.name;
        rep.merge(x);
    }
    return rep;
}

}  // namespace eds
