/* generic=float variant=good bounds=off */
float *P_vec; /* dims: n */
float *P_len; /* dims: (scalar) */
for (indx _t = 0; _t < _nthread; _t++) {
  float acc = 0;
  for (indx n = 0; n < _size_n; n++) {
    acc += (P_vec[_off_vec + n * _inc_vec_n] * P_vec[_off_vec + n * _inc_vec_n]);
  }
  P_len[_off_len] = sqrt(acc);
  _off_vec += _tinc_vec;
  _off_len += _tinc_len;
}
