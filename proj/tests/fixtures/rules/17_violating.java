// api: ProgressDialog.dismiss
ProgressDialog progressDialog = ProgressDialog.show(this, "", "Loading");
loadData();
if (progressDialog.isShowing()) {
    progressDialog.dismiss();
}
