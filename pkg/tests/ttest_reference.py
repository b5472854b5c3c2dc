"""Frozen reference values for the t-test battery.

Expected t statistics, two-tailed p-values, and (for the unequal-variance
test) Welch-Satterthwaite degrees of freedom were computed ahead of time with
scipy.stats 1.x (ttest_rel / ttest_ind(equal_var=False)) and are frozen here
so the hand-rolled implementations are checked against an independent source.
"""

# (a, b, expected_t, expected_p)
PAIRED_BATTERY = [
    ([1.1, 2.0, 3.2, 4.1],
     [1.0, 1.8, 3.0, 4.4],
     0.42008402520840127, 0.7026969438943627),
    ([-0.25491, 0.542592, 0.392331, -0.605612, -1.293309],
     [0.683857, -0.197496, 1.966727, -0.007295, -1.12967],
     -1.3075117318189986, 0.26112721620383633),
    ([1.367232, 1.975433, 1.986305, 1.768912, 1.342346, 2.080018, 1.833037, 1.185613],
     [1.05984, 1.283996, 1.819579, 1.53085, 1.695024, 1.236262, 1.270203, 1.853433],
     1.2289336191132374, 0.25880281006439515),
    ([-3.610407, -0.526238, 1.033734, -4.317182, 1.130798, 3.485108, -0.954223, 2.111196, -4.939543, -1.228974, 0.474852, -1.585714],
     [2.139426, 0.407689, -2.03443, 5.563853, -1.291172, 1.834261, -0.412146, 0.659174, -4.150089, -1.805397, 2.63647, -2.904333],
     -0.7438861028172843, 0.4725366268963377),
    ([0.54163, -0.779339, -0.803283, -0.626059, -0.614199, -0.332863, -0.283359, 0.28865, -0.002473],
     [1.193497, 1.227622, 1.104591, 1.158976, 1.320004, 1.261522, 1.192451, 1.227942, 1.170219],
     -9.352398245361666, 1.3960509633902684e-05),
    ([10.570454, 11.597244, 12.473074, 11.458111, 10.49973, 10.138581, 11.127102, 7.945302, 6.999948, 10.576556, 9.255675, 8.121631, 10.9727, 11.488131, 10.139367, 9.32352, 6.40115, 9.596298, 12.805949, 8.701161, 10.661839, 9.211383, 11.944399, 11.819799, 9.142023, 9.291538, 10.069176, 9.778434, 9.48363, 10.758278],
     [11.195317, 11.840312, 10.441326, 9.626806, 10.922203, 10.235128, 10.275309, 9.261861, 12.221435, 12.045567, 10.034269, 10.784634, 11.526575, 11.293295, 12.035633, 10.340456, 9.770437, 10.690035, 11.46388, 9.1224, 10.563424, 11.450581, 9.080822, 9.65386, 11.058832, 10.819059, 9.474408, 10.686045, 11.074667, 10.095307],
     -1.7745339970393659, 0.0864746530679707),
    ([-0.096486, -0.290837, -0.431829, -1.219426, -1.225839, 0.103215, -0.506372],
     [-0.890477, 0.294915, -0.096715, -0.992625, -1.140976, -0.689039, -0.708851],
     0.38716523878873266, 0.7119942000112213),
    ([-3.933318, -3.979897, -4.424632, -3.779533, -3.969479, -4.315037, -4.131511, -4.14782, -4.295842, -4.149127],
     [-4.123558, -4.059306, -4.430457, -3.575128, -3.861985, -4.327493, -4.14137, -4.26714, -4.244521, -4.31673],
     0.5694157792829214, 0.5830043564059804),
    ([7.980804, 4.594393, 2.834274, 4.832007, -0.272388, 2.275012, -2.574932, 2.473634, -0.006281, -7.84173, -0.005689, -1.08547, 0.171696, -0.359967],
     [5.827066, 4.118892, 0.752318, 6.773714, 0.398728, 2.931076, -7.27072, -1.728657, -2.439411, -7.311806, 0.019527, 4.269114, -0.237144, 1.871372],
     0.507123835430817, 0.620560747353423),
    ([-0.000994, -0.002615, -0.001117, -0.005249, 0.016996],
     [0.007024, -0.000641, 0.004166, -0.003886, 0.018648],
     -2.8147980996537068, 0.04808167964588706),
]

# (a, b, expected_t, expected_p, expected_df)
WELCH_BATTERY = [
    ([1.1, 2.0, 3.2, 4.1],
     [1.0, 1.8, 3.0, 4.4],
     0.05040059674659851, 0.961460487488419, 5.920331368984032),
    ([2.1, 2.5, 2.3, 2.2, 2.4],
     [1.1, 1.0, 1.3],
     10.320936930842798, 0.00027488286127189804, 4.473572938689215),
    ([-0.25491, 0.542592, 0.392331, -0.605612, -1.293309],
     [0.683857, -0.197496, 1.966727, -0.007295, -1.12967],
     -0.8246441593834084, 0.43722265099797963, 6.880879582752699),
    ([1.367232, 1.975433, 1.986305, 1.768912, 1.342346, 2.080018, 1.833037, 1.185613],
     [1.05984, 1.283996, 1.819579, 1.53085, 1.695024, 1.236262, 1.270203, 1.853433],
     1.3910459642889799, 0.1863580830130312, 13.720987806957853),
    ([-3.610407, -0.526238, 1.033734, -4.317182, 1.130798, 3.485108, -0.954223, 2.111196, -4.939543, -1.228974, 0.474852, -1.585714],
     [2.139426, 0.407689, -2.03443, 5.563853, -1.291172, 1.834261, -0.412146, 0.659174, -4.150089, -1.805397, 2.63647, -2.904333],
     -0.7356417058174537, 0.46973770269655735, 21.948847295611486),
    ([-0.003183, 1.682853, 0.196387, 0.12029, -0.236602, 0.717987],
     [0.693177, 1.284992, 0.562221, 0.412607, 0.806704, 0.311909, 2.197988, 0.630175, 2.160878],
     -1.5947204094824523, 0.13879693513440655, 11.113619185297337),
    ([5.607519, 5.744809, 6.312232, 3.866811, 4.287106, 3.017286, 4.975985, 6.139069, 5.114808, 4.800955, 6.244605, 5.906439, 6.624499, 6.254501, 4.628965, 5.963206, 4.709599, 4.174789, 3.76854, 6.053089],
     [4.566646, 4.558904, 4.765921, 5.714245, 5.052741, 3.1913, 3.421912],
     1.8284437595863507, 0.09232306039628298, 12.053268429646803),
    ([0.54163, -0.779339, -0.803283, -0.626059, -0.614199, -0.332863, -0.283359, 0.28865, -0.002473],
     [1.193497, 1.227622, 1.104591, 1.158976, 1.320004, 1.261522, 1.192451, 1.227942, 1.170219],
     -9.302794646829678, 1.1609594726549e-05, 8.271919266092041),
    ([-3.534801, -4.627752, -2.292113, 2.007246, -4.203733, -1.842229, -3.956085, -0.738173, 2.620378, -7.08683, -0.431951, -2.065948, -6.205013, -5.150298, 1.235658],
     [-4.477729, 0.942636, -1.698022, -1.347441],
     -0.5745846729504532, 0.5859220644044645, 6.162351517090661),
    ([10.570454, 11.597244, 12.473074, 11.458111, 10.49973, 10.138581, 11.127102, 7.945302, 6.999948, 10.576556, 9.255675, 8.121631, 10.9727, 11.488131, 10.139367, 9.32352, 6.40115, 9.596298, 12.805949, 8.701161, 10.661839, 9.211383, 11.944399, 11.819799, 9.142023, 9.291538, 10.069176, 9.778434, 9.48363, 10.758278],
     [11.195317, 11.840312, 10.441326, 9.626806, 10.922203, 10.235128, 10.275309, 9.261861, 12.221435, 12.045567, 10.034269, 10.784634, 11.526575, 11.293295, 12.035633, 10.340456, 9.770437, 10.690035, 11.46388, 9.1224, 10.563424, 11.450581, 9.080822, 9.65386, 11.058832, 10.819059, 9.474408, 10.686045, 11.074667, 10.095307],
     -1.7362030617487874, 0.08909188494378872, 46.91305390920798),
]
