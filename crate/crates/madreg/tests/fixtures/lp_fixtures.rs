//! Median-regression problems solved independently with an interior-point
//! LP solver (HiGHS) on the u/v-split formulation; optimal objectives are
//! frozen here as a cross-check for the simplex implementation.

pub struct LpFixture {
    pub n: usize,
    pub p: usize,
    pub x: &'static [f64],
    pub y: &'static [f64],
    pub objective: f64,
}

static X0: [f64; 14] = [
    -2.645487, -1.869251, 0.608083, 1.406742, 0.819139, 0.88174,
    0.024245, -0.663994, -0.144744, 0.903089, -0.594786, -0.295904,
    1.669402, -0.899316,
];
static Y0: [f64; 7] = [
    -2.30205, -2.497772, 0.19215, -0.858811, -1.796814, -1.884059,
    -0.514126,
];
static X1: [f64; 36] = [
    -0.36604, -0.460386, 0.121401, -1.23006, -1.023358, -0.828324,
    -1.718209, 0.247484, 2.033296, -0.065008, 0.69282, -0.758271,
    1.174983, -0.057528, 0.884487, -0.792325, -0.225914, 0.02936,
    1.56025, 0.34004, -1.142574, 1.11315, -1.678526, 0.01217,
    -0.474817, 0.631881, 0.535132, -0.22425, 2.29942, 0.331821,
    0.564237, 0.693282, -0.793322, 0.448442, 1.648064, -2.244247,
];
static Y1: [f64; 12] = [
    3.806344, -1.497202, -2.648922, -0.552682, -1.633238, -0.607058,
    1.116812, -0.187941, 0.047517, -0.375527, 2.402152, -0.228944,
];
static X2: [f64; 100] = [
    0.200728, 0.098149, -0.367696, -0.581144, -0.594596, -0.332408,
    -0.059607, -0.009148, 0.751294, 0.915784, 0.495531, 0.319973,
    -0.205011, 1.667243, -0.459478, -1.025064, -0.485711, -0.218696,
    -1.840544, -0.042918, 0.198996, 1.244086, -1.063794, -0.749118,
    -0.353135, -0.335907, -0.809191, -0.890089, 0.188039, -1.25814,
    -0.279135, -0.260285, 0.375818, 0.121431, 0.328119, -1.239808,
    -1.674355, -0.946919, -0.246857, 1.260035, -0.060567, 0.712333,
    -0.302129, 0.86583, 0.398834, 0.617686, 0.809231, 1.235323,
    0.943538, 0.387462, -0.11351, -1.325724, 1.425484, -0.991264,
    -1.350331, -2.084553, -0.88663, 0.279922, -0.278587, -0.4579,
    -0.497906, -0.376501, -0.678865, 0.550239, 1.927981, -0.517629,
    -0.284492, -0.670109, 0.246866, 0.242722, 0.169666, -0.776016,
    -0.639791, 0.087516, -0.668837, 0.71584, -0.624726, -0.592186,
    1.34294, -0.895488, 0.399664, 0.957984, -0.465263, 0.463694,
    -1.159059, 1.281157, 0.792977, -0.110305, -0.586472, -0.383942,
    0.620542, 0.100538, -0.156298, 0.03086, 0.469129, -0.531108,
    -0.945339, 1.600031, 0.8508, 0.047229,
];
static Y2: [f64; 25] = [
    0.250699, 2.35641, -0.463678, -2.641092, 1.914676, 0.780878,
    -2.804094, 0.17395, 1.223582, 0.089238, 0.401869, -1.853722,
    0.168591, 3.377446, -2.254605, -1.541815, -1.859802, 1.02225,
    -0.356563, -0.223223, -1.241035, 0.649494, -0.71458, 2.07225,
    1.817535,
];
static X3: [f64; 240] = [
    -0.298942, -0.653391, -0.859474, 0.607283, -1.907154, 0.390723,
    -0.168247, 0.364926, -0.289355, -0.126263, 1.187724, 0.174487,
    -0.724558, 0.593922, 0.341386, 0.468001, -0.008692, -1.326072,
    -0.450973, 1.054464, 0.625123, -0.457502, 0.514424, -0.013455,
    0.484409, 1.591292, 1.851677, 0.657939, -1.182497, 0.051722,
    -0.100344, 0.461382, -1.305923, 0.167806, -0.992881, -0.840274,
    -0.281818, -1.476429, -0.834651, 0.577251, -0.051338, 0.517008,
    -0.50568, -0.552188, -0.599863, 0.393346, 2.243165, 0.635909,
    0.04227, 0.510057, -1.116658, -0.128046, 0.444276, 3.173218,
    0.950155, -0.494053, -1.076351, 0.978946, -1.048399, -0.260896,
    -1.677064, -1.217835, -0.357517, 0.272772, 0.457513, -1.278241,
    -1.747819, 0.138272, 0.999873, 0.720015, 0.228633, 2.225711,
    -0.418779, -0.864456, 0.963834, -0.594576, 0.226777, -0.595006,
    0.111719, -0.0186, -1.913547, -0.42886, 0.189888, 0.834813,
    -0.407826, -0.459713, 1.131073, 0.513055, -0.482343, 0.195328,
    1.38507, 0.964237, 1.147009, 1.300376, -1.475193, 1.446155,
    0.623543, -1.225224, 0.775369, -0.979081, 1.604088, -0.750869,
    -0.590532, 0.250081, -1.021324, 2.058107, -0.462732, -1.03824,
    0.208439, -0.71844, -1.851632, -0.209499, 0.031481, 0.520793,
    0.169775, 1.257343, -0.358222, -0.911026, -0.775845, -0.913478,
    1.324265, -0.374463, 1.729163, -0.662773, -1.254261, 0.568561,
    0.469056, -0.460835, -0.128055, 0.590444, 1.828323, -1.846732,
    0.427313, -1.203647, 0.94618, -1.647055, -2.046643, 2.144108,
    -2.166714, -1.197959, -0.112908, 1.019783, -0.238118, -0.909877,
    -0.662656, -0.178219, -0.676666, -1.469963, 0.427218, 0.208169,
    0.660027, 2.00869, -0.987727, -1.506927, 0.739848, -0.07453,
    0.237843, 0.497737, -1.098426, -0.373528, 2.167109, -0.043887,
    -0.846389, -0.813564, -1.634652, 0.913495, -0.712273, -0.404102,
    1.283757, -0.052606, 1.087642, -0.173009, 0.832163, -0.409908,
    -0.094188, -0.631318, 0.966108, -1.858388, 1.526189, 1.021245,
    1.796706, -0.826064, -1.032337, -1.071468, 0.390446, 0.121971,
    -1.179523, 0.676636, -1.321318, 0.512304, 0.764159, -0.235801,
    -0.910149, 0.108021, 0.559166, 0.42987, -1.731326, 0.441833,
    0.108979, -0.146997, 0.001998, 0.580093, -0.129374, -0.208613,
    -0.100431, 0.663856, -0.845705, 0.831233, -2.580214, 2.308191,
    -0.119123, -0.097127, -0.997304, 0.557741, 0.466723, 0.336123,
    -0.907621, 0.620975, -2.259463, 1.109371, -1.584623, -0.296897,
    -0.42457, 0.586553, 0.513307, -0.282473, 0.260977, -0.875073,
    -0.099666, 0.336227, 1.036292, -1.023879, -1.166304, 0.908856,
    0.510896, 2.435244, -0.961088, 0.114088, -3.97543, -0.176684,
];
static Y3: [f64; 40] = [
    3.02773, 1.932601, 0.097778, 0.175743, 3.39988, -3.125373,
    1.981383, 0.177547, 4.283498, 3.136926, -0.400747, -2.417825,
    -0.653593, 0.6112, -1.152495, -1.703556, 2.119419, 0.000681,
    1.245259, -1.34163, -1.171456, -1.11853, 2.423049, -0.690273,
    0.95945, 1.551263, 2.247643, 1.555476, 3.773333, 0.270114,
    3.547845, 0.820205, 0.595012, 0.885264, -1.0243, 2.222584,
    0.347384, 1.377273, -0.692292, -2.296434,
];

pub static LP_FIXTURES: [LpFixture; 4] = [
    LpFixture { n: 7, p: 2, x: &X0, y: &Y0, objective: 1.3000366521681475 },
    LpFixture { n: 12, p: 3, x: &X1, y: &Y1, objective: 1.0855087084807853 },
    LpFixture { n: 25, p: 4, x: &X2, y: &Y2, objective: 1.1426101885044782 },
    LpFixture { n: 40, p: 6, x: &X3, y: &Y3, objective: 1.2527780709097394 },
];
