// api: SQLiteDatabase.query
SQLiteDatabase db = helper.getReadableDatabase();
Cursor cursor = db.query("users", null, null, null, null, null, null);
while (cursor.moveToNext()) {
    names.add(cursor.getString(0));
}
cursor.close();
db.close();
