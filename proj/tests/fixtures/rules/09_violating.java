// api: TypedArray.getString
TypedArray a = context.obtainStyledAttributes(attrs, R.styleable.MyView);
String title = a.getString(R.styleable.MyView_title);
titleView.setText(title);
