//! Published worked-example values: p = 12347, g = (2,5,6), a = 3, b = 7.

pub const PRIME: u64 = 12347;
pub const GVEC: [u64; 3] = [2, 5, 6];
pub const SECRET_A: u64 = 3;
pub const SECRET_B: u64 = 7;
pub const PUBLIC_A: [u64; 3] = [8, 125, 216];
pub const PUBLIC_B: [u64; 3] = [128, 4043, 8302];
pub const SHARED: [u64; 3] = [10509, 11849, 10836];
pub const MESSAGE: &str = "Peace at home, peace in the world.";
pub const SHAPE: (usize, usize) = (8, 10);
pub const START: (usize, usize) = (2, 3);

/// Printed masked plaintext block and block ciphertext for every window of
/// the 8x10 example, keyed by 1-based top-left label.
pub type TableEntry = ((usize, usize), [[u64; 3]; 3], [[u64; 3]; 3]);

pub const TABLE: [TableEntry; 12] = [
    (
        (1, 1),
        [[7070, 6104, 8682], [7237, 8332, 9140], [1996, 11643, 5409]],
        [[2091, 743, 4301], [5009, 1368, 7716], [5591, 11473, 1776]],
    ),
    (
        (1, 4),
        [[9852, 816, 9929], [95, 2422, 2280], [8650, 4044, 7539]],
        [[12316, 3959, 6156], [3583, 10328, 2098], [3501, 9088, 2885]],
    ),
    (
        (1, 7),
        [[4171, 1751, 4337], [10936, 11535, 10650], [547, 182, 9881]],
        [[7689, 4239, 5828], [5263, 8886, 9820], [5472, 4400, 2861]],
    ),
    (
        (1, 8),
        [[1751, 4337, 3056], [11535, 10650, 7076], [182, 9881, 10737]],
        [[1061, 4391, 5128], [6176, 11482, 3979], [6066, 11551, 4568]],
    ),
    (
        (4, 1),
        [[1945, 6989, 1309], [3684, 4915, 5321], [302, 4670, 11984]],
        [[11300, 3341, 7052], [7249, 5177, 4347], [801, 5764, 8462]],
    ),
    (
        (4, 4),
        [[4032, 3631, 518], [6829, 9588, 2565], [2835, 5583, 4371]],
        [[96, 4894, 4155], [1952, 7051, 9031], [1896, 1216, 4967]],
    ),
    (
        (4, 7),
        [[5978, 5946, 8760], [9481, 1340, 10505], [4705, 7215, 8037]],
        [[1796, 890, 3438], [4605, 726, 7304], [5448, 651, 7364]],
    ),
    (
        (4, 8),
        [[5946, 8760, 4217], [1340, 10505, 5612], [7215, 8037, 11825]],
        [[7523, 9859, 6705], [6295, 9137, 10118], [8883, 10389, 9857]],
    ),
    (
        (6, 1),
        [[302, 4670, 11984], [4103, 1276, 6541], [5675, 6057, 4162]],
        [[801, 5764, 8462], [745, 9199, 9299], [1447, 7615, 6159]],
    ),
    (
        (6, 4),
        [[2835, 5583, 4371], [119, 3752, 9736], [1042, 5193, 4012]],
        [[11152, 768, 9792], [2429, 10052, 11772], [7001, 11181, 5345]],
    ),
    (
        (6, 7),
        [[4705, 7215, 8037], [7518, 3435, 3192], [11330, 2214, 10338]],
        [[5448, 651, 7364], [10168, 2774, 3812], [6895, 3086, 1160]],
    ),
    (
        (6, 8),
        [[7215, 8037, 11825], [3435, 3192, 4134], [2214, 10338, 4332]],
        [[8883, 10839, 9857], [4255, 9242, 11281], [10980, 3436, 5553]],
    ),
];
