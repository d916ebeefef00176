/* generic=double variant=good bounds=off */
double *P_vec; /* dims: n */
double *P_len; /* dims: (scalar) */
for (indx _t = 0; _t < _nthread; _t++) {
  double acc = 0;
  for (indx n = 0; n < _size_n; n++) {
    acc += (P_vec[_off_vec + n * _inc_vec_n] * P_vec[_off_vec + n * _inc_vec_n]);
  }
  P_len[_off_len] = sqrt(acc);
  _off_vec += _tinc_vec;
  _off_len += _tinc_len;
}
